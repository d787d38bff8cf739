//! Classifier training examples extracted from an aligned corpus.
//!
//! One example per source span whose gold translation is among the phrase
//! table candidates. Shared target features come from the reference
//! translation. Phrase counts are decremented for the gold pair of the
//! current sentence (leave-one-out) and the span is dropped if any of them
//! reaches zero.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classifier::{write_example_records, ExampleRecord};
use crate::corpus::AlignedSentencePair;
use crate::error::{Error, Result};
use crate::features::{
    source_shared_keys, target_shared_keys, translation_keys, ContextWord, FeatureConfig,
    TargetContext,
};
use crate::phrases::{PhraseTable, Span, TranslationOption};

#[derive(Debug, Clone, PartialEq)]
pub struct GoldTranslation {
    pub target_span: Span,
    pub context: TargetContext,
}

/// The two reference words preceding target position `start`, each with the
/// source words aligned to it.
pub fn reference_context(pair: &AlignedSentencePair, start: usize) -> TargetContext {
    let word_at = |offset: usize| -> ContextWord {
        if start < offset {
            return ContextWord::start();
        }
        let pos = start - offset;
        ContextWord {
            word: pair.target.words()[pos].clone(),
            aligned: pair
                .alignment
                .sources_of(pos)
                .into_iter()
                .map(|s| pair.source.words()[s].clone())
                .collect(),
        }
    };
    TargetContext::new(word_at(1), word_at(2))
}

/// Minimal alignment-consistent target span of a source span, with its
/// reference context. `None` when the span has no links or a link leaves the
/// box.
pub fn gold_translation(pair: &AlignedSentencePair, span: Span) -> Option<GoldTranslation> {
    let in_src = |s: usize| span.0 <= s && s <= span.1;
    let targets: Vec<usize> = pair
        .alignment
        .links()
        .filter(|&(s, _)| in_src(s))
        .map(|(_, t)| t)
        .collect();
    let t_min = *targets.iter().min()?;
    let t_max = *targets.iter().max()?;
    let consistent = pair
        .alignment
        .links()
        .all(|(s, t)| !(t_min <= t && t <= t_max) || in_src(s));
    if !consistent {
        return None;
    }
    Some(GoldTranslation {
        target_span: (t_min, t_max),
        context: reference_context(pair, t_min),
    })
}

/// Target spans reachable from the minimal gold span by attaching unaligned
/// neighbouring words, shortest first, then leftmost.
fn gold_span_variants(pair: &AlignedSentencePair, minimal: Span, max_len: usize) -> Vec<Span> {
    let aligned = |t: usize| pair.alignment.links().any(|(_, tt)| tt == t);
    let mut lo = minimal.0;
    while lo > 0 && !aligned(lo - 1) && minimal.1 + 1 - (lo - 1) <= max_len {
        lo -= 1;
    }
    let mut hi = minimal.1;
    while hi + 1 < pair.target.len() && !aligned(hi + 1) && hi + 1 + 1 - minimal.0 <= max_len {
        hi += 1;
    }
    let mut spans = Vec::new();
    for start in lo..=minimal.0 {
        for end in minimal.1..=hi {
            if end + 1 - start <= max_len {
                spans.push((start, end));
            }
        }
    }
    spans.sort_by_key(|&(s, e)| (e - s, s));
    spans
}

fn same_target(pair: &AlignedSentencePair, span: Span, option: &TranslationOption) -> bool {
    let words = &pair.target.words()[span.0..=span.1];
    words.len() == option.target_phrase.len()
        && words.iter().zip(&option.target_phrase).all(|(a, b)| a == b)
}

/// One classification instance: a source span, its candidates and the
/// position of the gold candidate.
#[derive(Debug, Clone)]
pub struct Instance<'t> {
    pub span: Span,
    pub target_span: Span,
    pub candidates: &'t [TranslationOption],
    pub gold: usize,
    pub context: TargetContext,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtractionStats {
    pub spans: usize,
    pub no_candidates: usize,
    pub no_gold: usize,
    pub gold_not_in_candidates: usize,
    pub leave_one_out_skipped: usize,
    pub emitted: usize,
}

impl ExtractionStats {
    pub fn add(&mut self, other: &ExtractionStats) {
        self.spans += other.spans;
        self.no_candidates += other.no_candidates;
        self.no_gold += other.no_gold;
        self.gold_not_in_candidates += other.gold_not_in_candidates;
        self.leave_one_out_skipped += other.leave_one_out_skipped;
        self.emitted += other.emitted;
    }
}

/// Classification instances of one sentence pair.
pub fn instances<'t>(
    pair: &AlignedSentencePair,
    table: &'t PhraseTable,
    max_len: usize,
    leave_one_out: bool,
    stats: &mut ExtractionStats,
) -> Vec<Instance<'t>> {
    let n = pair.source.len();
    let mut out = Vec::new();
    for start in 0..n {
        for end in start..n.min(start + max_len) {
            stats.spans += 1;
            let forms: Vec<&str> = pair.source.words()[start..=end]
                .iter()
                .map(|w| w.form())
                .collect();
            let candidates = table.lookup(&forms);
            if candidates.is_empty() {
                stats.no_candidates += 1;
                continue;
            }
            let Some(gold) = gold_translation(pair, (start, end)) else {
                stats.no_gold += 1;
                continue;
            };
            let found = gold_span_variants(pair, gold.target_span, max_len)
                .into_iter()
                .find_map(|ts| {
                    candidates
                        .iter()
                        .position(|o| same_target(pair, ts, o))
                        .map(|i| (ts, i))
                });
            let Some((target_span, gold_index)) = found else {
                stats.gold_not_in_candidates += 1;
                continue;
            };
            if leave_one_out {
                let option = &candidates[gold_index];
                let remaining = [
                    option.pair_count,
                    table.source_count(&option.source_key()),
                    table.target_count(&option.target_key()),
                ];
                if remaining.iter().any(|&c| c <= 1) {
                    stats.leave_one_out_skipped += 1;
                    continue;
                }
            }
            stats.emitted += 1;
            out.push(Instance {
                span: (start, end),
                target_span,
                candidates,
                gold: gold_index,
                context: reference_context(pair, target_span.0),
            });
        }
    }
    out
}

impl Instance<'_> {
    pub fn record(&self, pair: &AlignedSentencePair, config: &FeatureConfig) -> ExampleRecord {
        ExampleRecord {
            shared_src: source_shared_keys(&pair.source, self.span, config),
            shared_tgt: target_shared_keys(&self.context, config),
            candidates: self
                .candidates
                .iter()
                .enumerate()
                .map(|(i, o)| (u8::from(i != self.gold), translation_keys(o, config)))
                .collect(),
        }
    }
}

/// Training examples of one sentence pair, with leave-one-out applied.
pub fn generate_examples(
    pair: &AlignedSentencePair,
    table: &PhraseTable,
    config: &FeatureConfig,
    max_len: usize,
) -> (Vec<ExampleRecord>, ExtractionStats) {
    generate_examples_with(pair, table, config, max_len, true)
}

pub fn generate_examples_with(
    pair: &AlignedSentencePair,
    table: &PhraseTable,
    config: &FeatureConfig,
    max_len: usize,
    leave_one_out: bool,
) -> (Vec<ExampleRecord>, ExtractionStats) {
    let mut stats = ExtractionStats::default();
    let records = instances(pair, table, max_len, leave_one_out, &mut stats)
        .iter()
        .map(|inst| inst.record(pair, config))
        .collect();
    (records, stats)
}

/// Examples for a whole corpus, processed in parallel; output order follows
/// the corpus regardless of the number of threads.
pub fn generate_corpus_examples(
    corpus: &[AlignedSentencePair],
    table: &PhraseTable,
    config: &FeatureConfig,
    max_len: usize,
    leave_one_out: bool,
) -> (Vec<ExampleRecord>, ExtractionStats) {
    let per_sentence: Vec<(Vec<ExampleRecord>, ExtractionStats)> = corpus
        .par_iter()
        .map(|pair| generate_examples_with(pair, table, config, max_len, leave_one_out))
        .collect();
    let mut stats = ExtractionStats::default();
    let mut records = Vec::new();
    for (r, s) in per_sentence {
        stats.add(&s);
        records.extend(r);
    }
    (records, stats)
}

pub fn write_examples<'a, I>(records: I, path: impl AsRef<Path>) -> Result<usize>
where
    I: IntoIterator<Item = &'a ExampleRecord>,
{
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let n = write_example_records(&mut w, records).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(n)
}

/// Shuffles with a seeded generator and deals the records round-robin into
/// `k` shards.
pub fn shard_records(
    mut records: Vec<ExampleRecord>,
    k: usize,
    seed: u64,
) -> Vec<Vec<ExampleRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records.shuffle(&mut rng);
    let mut shards = vec![Vec::new(); k.max(1)];
    for (i, r) in records.into_iter().enumerate() {
        shards[i % k.max(1)].push(r);
    }
    shards
}
