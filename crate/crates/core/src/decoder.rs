//! Left-to-right stack decoder with the phrase classifier as a log-linear
//! feature.
//!
//! Classifier evaluation per sentence:
//!
//! * before search, translation features of every option are hashed once and
//!   the source-context part of each option's score is precomputed;
//! * target-context features are extracted once per distinct context and
//!   their hashes kept;
//! * the first query for a (span, context) pair scores and normalizes all
//!   options of the span at once, and later queries read the stored result.
//!
//! With `naive` set, every query re-extracts all features of all options of
//! the span instead. Both paths do the same floating-point operations in the
//! same order, so they produce identical scores.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::classifier::{log_softmax, LinearModel};
use crate::corpus::{FactoredWord, Sentence};
use crate::error::{Error, Result};
use crate::features::{
    extract_source_shared, extract_target_shared, extract_translation, ContextWord, FeatureConfig,
    FeatureSet, TargetContext,
};
use crate::lm::{LMState, NGramModel};
use crate::phrases::{PhraseTable, Span, TranslationOption, DEFAULT_MAX_PHRASE_LEN};

pub const DEFAULT_BEAM: usize = 100;
pub const DEFAULT_DISTORTION_LIMIT: usize = 6;

pub const NUM_FEATURES: usize = 7;
pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "tm_tgt_given_src",
    "tm_src_given_tgt",
    "lm",
    "word_penalty",
    "phrase_penalty",
    "distortion",
    "classifier",
];
const TM_TGS: usize = 0;
const TM_SGT: usize = 1;
const LM: usize = 2;
const WORD_PENALTY: usize = 3;
const PHRASE_PENALTY: usize = 4;
const DISTORTION: usize = 5;
const CLASSIFIER: usize = 6;

/// Unweighted feature values of a (partial) translation, in
/// [`FEATURE_NAMES`] order.
pub type FeatureScores = [f64; NUM_FEATURES];

/// Log-linear weights. Feature values: phrase log-probabilities (natural
/// log), LM log10 score, `-1` per target word, `+1` per phrase, minus the
/// jump distance, and the natural log of the classifier probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderWeights(pub FeatureScores);

impl Default for DecoderWeights {
    fn default() -> Self {
        DecoderWeights([1.0, 1.0, 1.0, 0.0, 0.0, 0.3, 1.0])
    }
}

impl DecoderWeights {
    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.0[i])
    }

    pub fn dot(&self, features: &FeatureScores) -> f64 {
        self.0.iter().zip(features).map(|(w, f)| w * f).sum()
    }

    /// `name<TAB>weight` lines; names not listed keep their default.
    pub fn parse(text: &str) -> Result<DecoderWeights> {
        let mut weights = DecoderWeights::default();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let mut fields = line.split_whitespace();
            let (Some(name), Some(value), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::format(format!("bad weight line {line:?}")));
            };
            let i = FEATURE_NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::Config(format!("unknown feature {name:?}")))?;
            let v: f64 = value
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::format(format!("bad weight in {line:?}")))?;
            weights.0[i] = v;
        }
        Ok(weights)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<DecoderWeights> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DecoderWeights::parse(&text)
    }

    pub fn to_text(&self) -> String {
        FEATURE_NAMES
            .iter()
            .zip(self.0)
            .map(|(n, w)| format!("{n}\t{w}\n"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderConfig {
    pub beam: usize,
    /// `None` means unlimited.
    pub distortion_limit: Option<usize>,
    /// Disable all classifier caches.
    pub naive: bool,
    /// Copy unknown single words through instead of failing.
    pub allow_oov: bool,
    pub max_phrase_len: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            beam: DEFAULT_BEAM,
            distortion_limit: Some(DEFAULT_DISTORTION_LIMIT),
            naive: false,
            allow_oov: true,
            max_phrase_len: DEFAULT_MAX_PHRASE_LEN,
        }
    }
}

/// Classifier context plus LM state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecoderState {
    pub context: TargetContext,
    pub lm: LMState,
}

/// A translation option placed on a source span of the current sentence.
#[derive(Debug, Clone)]
pub struct DecodeOption {
    pub option: TranslationOption,
    /// Source words aligned to each target word.
    pub aligned: Vec<Vec<FactoredWord>>,
    lm_ids: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct SpanOptions {
    pub span: Span,
    pub options: Vec<DecodeOption>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CacheStats {
    /// Calls into source, target-context or translation feature extraction.
    pub feature_extractions: u64,
    pub classifier_queries: u64,
    pub result_hits: u64,
    pub result_misses: u64,
    pub state_misses: u64,
}

impl CacheStats {
    pub fn add(&mut self, o: &CacheStats) {
        self.feature_extractions += o.feature_extractions;
        self.classifier_queries += o.classifier_queries;
        self.result_hits += o.result_hits;
        self.result_misses += o.result_misses;
        self.state_misses += o.state_misses;
    }
}

/// Per-sentence classifier caches.
#[derive(Debug, Default)]
pub struct ClassifierCaches {
    /// (span, context) -> log-probabilities of all options of the span.
    result: HashMap<(usize, u32), Vec<f64>>,
    /// context -> hashed target-context features.
    state: HashMap<u32, FeatureSet>,
    /// [span][option] -> hashed translation features.
    translation: Vec<Vec<FeatureSet>>,
    /// [span][option] -> `w · (T ∪ S_src × T)`.
    src_score: Vec<Vec<f64>>,
    pub stats: CacheStats,
}

/// Interned classifier contexts of one sentence.
#[derive(Debug, Default)]
struct Contexts {
    items: Vec<TargetContext>,
    ids: HashMap<TargetContext, u32>,
    transitions: HashMap<(u32, usize, usize), u32>,
}

impl Contexts {
    fn intern(&mut self, ctx: TargetContext) -> u32 {
        if let Some(&id) = self.ids.get(&ctx) {
            return id;
        }
        let id = self.items.len() as u32;
        self.items.push(ctx.clone());
        self.ids.insert(ctx, id);
        id
    }
}

/// Everything needed to translate: models, weights and search settings.
pub struct Decoder<'m> {
    pub table: &'m PhraseTable,
    pub lm: &'m NGramModel,
    pub model: &'m LinearModel,
    pub features: &'m FeatureConfig,
    pub weights: DecoderWeights,
    pub config: DecoderConfig,
}

#[derive(Debug, Clone)]
pub struct Translation {
    pub words: Vec<FactoredWord>,
    pub total_score: f64,
    pub features: FeatureScores,
    /// Applied phrases in target order: source span and target forms.
    pub phrases: Vec<(Span, String)>,
    pub stats: CacheStats,
}

impl Translation {
    pub fn text(&self) -> String {
        self.words
            .iter()
            .map(FactoredWord::form)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coverage(Vec<u64>);

impl Coverage {
    pub fn new(len: usize) -> Self {
        Coverage(vec![0; len.div_ceil(64).max(1)])
    }

    pub fn is_covered(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_free(&self, span: Span) -> bool {
        (span.0..=span.1).all(|i| !self.is_covered(i))
    }

    pub fn with(&self, span: Span) -> Coverage {
        let mut next = self.clone();
        for i in span.0..=span.1 {
            next.0[i / 64] |= 1 << (i % 64);
        }
        next
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Maximal uncovered runs.
    pub fn gaps(&self, len: usize) -> Vec<Span> {
        let mut gaps = Vec::new();
        let mut start = None;
        for i in 0..len {
            match (self.is_covered(i), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    gaps.push((s, i - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            gaps.push((s, len - 1));
        }
        gaps
    }
}

/// Best-case score of every span: the better of its best single option
/// (phrase features and a context-free LM estimate, classifier excluded)
/// and the best split into two parts.
#[derive(Debug, Clone)]
pub struct FutureCosts {
    len: usize,
    table: Vec<f64>,
}

impl FutureCosts {
    pub fn get(&self, span: Span) -> f64 {
        self.table[span.0 * self.len + span.1]
    }

    pub fn of_coverage(&self, coverage: &Coverage) -> f64 {
        coverage
            .gaps(self.len)
            .into_iter()
            .map(|g| self.get(g))
            .sum()
    }
}

/// Weighted context-free estimate of one option.
pub fn option_estimate(
    option: &TranslationOption,
    lm: &NGramModel,
    weights: &DecoderWeights,
) -> f64 {
    let w = &weights.0;
    let forms: Vec<&str> = option
        .target_phrase
        .iter()
        .map(FactoredWord::form)
        .collect();
    w[TM_TGS] * option.logp_tgt_given_src
        + w[TM_SGT] * option.logp_src_given_tgt
        + w[LM] * lm.estimate_phrase(&forms)
        - w[WORD_PENALTY] * option.target_phrase.len() as f64
        + w[PHRASE_PENALTY]
}

pub fn future_cost(
    len: usize,
    spans: &[SpanOptions],
    lm: &NGramModel,
    weights: &DecoderWeights,
) -> FutureCosts {
    let mut table = vec![f64::NEG_INFINITY; len * len];
    for s in spans {
        let best = s
            .options
            .iter()
            .map(|o| option_estimate(&o.option, lm, weights))
            .fold(f64::NEG_INFINITY, f64::max);
        let cell = &mut table[s.span.0 * len + s.span.1];
        *cell = cell.max(best);
    }
    for width in 1..=len {
        for start in 0..=len - width {
            let end = start + width - 1;
            for mid in start..end {
                let split = table[start * len + mid] + table[(mid + 1) * len + end];
                if split > table[start * len + end] {
                    table[start * len + end] = split;
                }
            }
        }
    }
    FutureCosts { len, table }
}

#[derive(Debug, Clone)]
struct Hypothesis {
    coverage: Coverage,
    lm: LMState,
    context: u32,
    /// End of the last translated source phrase; -1 before the first.
    last_end: i64,
    score: f64,
    future: f64,
    features: FeatureScores,
    back: Option<(usize, usize, usize)>,
}

type RecombinationKey = (Coverage, i64, LMState, u32);

/// One sentence's search state: options, caches and contexts.
pub struct SentenceSearch<'d, 'm> {
    decoder: &'d Decoder<'m>,
    sentence: &'d Sentence,
    spans: Vec<SpanOptions>,
    caches: ClassifierCaches,
    contexts: Contexts,
    future: FutureCosts,
}

impl<'m> Decoder<'m> {
    pub fn new(
        table: &'m PhraseTable,
        lm: &'m NGramModel,
        model: &'m LinearModel,
        features: &'m FeatureConfig,
        weights: DecoderWeights,
        config: DecoderConfig,
    ) -> Result<Self> {
        model.check_config(features)?;
        if config.beam == 0 || config.max_phrase_len == 0 {
            return Err(Error::Config(
                "beam and max phrase length must be positive".into(),
            ));
        }
        Ok(Decoder {
            table,
            lm,
            model,
            features,
            weights,
            config,
        })
    }

    /// Translation options for every span of `sentence`, with unknown single
    /// words copied through when allowed.
    pub fn collect_options(&self, sentence: &Sentence) -> Result<Vec<SpanOptions>> {
        let words = sentence.words();
        let mut spans = Vec::new();
        for start in 0..words.len() {
            for end in start..words.len().min(start + self.config.max_phrase_len) {
                let forms: Vec<&str> = words[start..=end].iter().map(FactoredWord::form).collect();
                let mut found: Vec<TranslationOption> = self.table.lookup(&forms).to_vec();
                if found.is_empty() && start == end {
                    if !self.config.allow_oov {
                        return Err(Error::Untranslatable {
                            token: forms[0].to_string(),
                            position: start,
                        });
                    }
                    found.push(TranslationOption::copy_through(&words[start]));
                }
                if found.is_empty() {
                    continue;
                }
                let options = found
                    .into_iter()
                    .map(|option| {
                        let aligned = (0..option.target_phrase.len())
                            .map(|j| {
                                option
                                    .internal_alignment
                                    .links()
                                    .filter(|&(_, t)| t == j)
                                    .map(|(s, _)| words[start + s].clone())
                                    .collect()
                            })
                            .collect();
                        let lm_ids = option
                            .target_phrase
                            .iter()
                            .map(|w| self.lm.word_id(w.form()))
                            .collect();
                        DecodeOption {
                            option,
                            aligned,
                            lm_ids,
                        }
                    })
                    .collect();
                spans.push(SpanOptions {
                    span: (start, end),
                    options,
                });
            }
        }
        Ok(spans)
    }

    pub fn search<'d>(&'d self, sentence: &'d Sentence) -> Result<SentenceSearch<'d, 'm>> {
        let spans = self.collect_options(sentence)?;
        let future = future_cost(sentence.len(), &spans, self.lm, &self.weights);
        let mut search = SentenceSearch {
            decoder: self,
            sentence,
            spans,
            caches: ClassifierCaches::default(),
            contexts: Contexts::default(),
            future,
        };
        if !self.config.naive {
            search.precompute_options();
        }
        Ok(search)
    }

    pub fn decode(&self, sentence: &Sentence) -> Result<Translation> {
        let mut search = self.search(sentence)?;
        match search.run(self.config.distortion_limit) {
            Some(t) => Ok(t),
            // every hypothesis hit a dead end under the distortion limit
            None if self.config.distortion_limit.is_some() => search
                .run(None)
                .ok_or_else(|| Error::Internal("no complete hypothesis".into())),
            None => Err(Error::Internal("no complete hypothesis".into())),
        }
    }

    /// Decodes sentences on `jobs` threads; results keep input order.
    pub fn decode_all(&self, sentences: &[Sentence], jobs: usize) -> Result<Vec<Translation>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?;
        pool.install(|| sentences.par_iter().map(|s| self.decode(s)).collect())
    }
}

impl SentenceSearch<'_, '_> {
    pub fn spans(&self) -> &[SpanOptions] {
        &self.spans
    }

    pub fn stats(&self) -> CacheStats {
        self.caches.stats
    }

    pub fn future_costs(&self) -> &FutureCosts {
        &self.future
    }

    /// Source-context score of an option, from the cache.
    pub fn source_score(&self, span: usize, option: usize) -> Option<f64> {
        self.caches
            .src_score
            .get(span)
            .and_then(|s| s.get(option))
            .copied()
    }

    pub fn intern_context(&mut self, context: TargetContext) -> u32 {
        self.contexts.intern(context)
    }

    /// Hashes translation features of every option and precomputes the
    /// source-context part of their scores.
    fn precompute_options(&mut self) {
        let d = self.decoder;
        let bits = d.model.hash_bits();
        let mut translation = Vec::with_capacity(self.spans.len());
        let mut src_score = Vec::with_capacity(self.spans.len());
        for s in &self.spans {
            let shared_src = extract_source_shared(self.sentence, s.span, d.features, bits);
            self.caches.stats.feature_extractions += 1;
            let mut t_sets = Vec::with_capacity(s.options.len());
            let mut scores = Vec::with_capacity(s.options.len());
            for o in &s.options {
                let t = extract_translation(&o.option, d.features, bits);
                self.caches.stats.feature_extractions += 1;
                scores.push(d.model.source_part(&shared_src, &t));
                t_sets.push(t);
            }
            translation.push(t_sets);
            src_score.push(scores);
        }
        self.caches.translation = translation;
        self.caches.src_score = src_score;
    }

    /// Natural-log probability of option `option` of span `span` given
    /// classifier context `context`.
    pub fn evaluate_classifier(&mut self, span: usize, option: usize, context: u32) -> Result<f64> {
        if option >= self.spans.get(span).map_or(0, |s| s.options.len()) {
            return Err(Error::Internal(format!(
                "no option {option} for span {span}"
            )));
        }
        self.caches.stats.classifier_queries += 1;
        if self.decoder.config.naive {
            return Ok(self.evaluate_naive(span, option, context));
        }
        if let Some(scores) = self.caches.result.get(&(span, context)) {
            self.caches.stats.result_hits += 1;
            return Ok(scores[option]);
        }
        self.caches.stats.result_misses += 1;
        let d = self.decoder;
        let caches = &mut self.caches;
        let shared_tgt = caches.state.entry(context).or_insert_with(|| {
            caches.stats.state_misses += 1;
            caches.stats.feature_extractions += 1;
            extract_target_shared(
                &self.contexts.items[context as usize],
                d.features,
                d.model.hash_bits(),
            )
        });
        let scores: Vec<f64> = caches.translation[span]
            .iter()
            .zip(&caches.src_score[span])
            .map(|(t, &src)| src + d.model.target_part(shared_tgt, t))
            .collect();
        let normalized = log_softmax(&scores);
        let value = normalized[option];
        caches.result.insert((span, context), normalized);
        Ok(value)
    }

    fn evaluate_naive(&mut self, span: usize, option: usize, context: u32) -> f64 {
        let d = self.decoder;
        let bits = d.model.hash_bits();
        let s = &self.spans[span];
        let ctx = &self.contexts.items[context as usize];
        let mut scores = Vec::with_capacity(s.options.len());
        for o in &s.options {
            let shared_src = extract_source_shared(self.sentence, s.span, d.features, bits);
            let shared_tgt = extract_target_shared(ctx, d.features, bits);
            let t = extract_translation(&o.option, d.features, bits);
            self.caches.stats.feature_extractions += 3;
            scores
                .push(d.model.source_part(&shared_src, &t) + d.model.target_part(&shared_tgt, &t));
        }
        log_softmax(&scores)[option]
    }

    fn next_context(&mut self, context: u32, span: usize, option: usize) -> u32 {
        if let Some(&id) = self.contexts.transitions.get(&(context, span, option)) {
            return id;
        }
        let o = &self.spans[span].options[option];
        let mut ctx = self.contexts.items[context as usize].clone();
        for (word, aligned) in o.option.target_phrase.iter().zip(&o.aligned) {
            ctx = ctx.push(ContextWord {
                word: word.clone(),
                aligned: aligned.clone(),
            });
        }
        let id = self.contexts.intern(ctx);
        self.contexts
            .transitions
            .insert((context, span, option), id);
        id
    }

    /// Runs the stack search; `None` if no hypothesis covers the sentence.
    pub fn run(&mut self, distortion_limit: Option<usize>) -> Option<Translation> {
        let n = self.sentence.len();
        let beam = self.decoder.config.beam;
        let weights = self.decoder.weights;
        let lm = self.decoder.lm;
        let start_ctx = self.contexts.intern(TargetContext::sentence_start());

        let mut arena: Vec<Hypothesis> = Vec::new();
        let mut stacks: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        let mut recombination: Vec<HashMap<RecombinationKey, usize>> = vec![HashMap::new(); n + 1];
        let coverage = Coverage::new(n);
        arena.push(Hypothesis {
            future: self.future.of_coverage(&coverage),
            coverage,
            lm: lm.initial_state(),
            context: start_ctx,
            last_end: -1,
            score: 0.0,
            features: [0.0; NUM_FEATURES],
            back: None,
        });
        stacks[0].push(0);

        for covered in 0..n {
            let mut ids = std::mem::take(&mut stacks[covered]);
            ids.sort_by(|&a, &b| {
                let (ha, hb) = (&arena[a], &arena[b]);
                (hb.score + hb.future)
                    .total_cmp(&(ha.score + ha.future))
                    .then(a.cmp(&b))
            });
            ids.truncate(beam);
            for id in ids {
                for span_idx in 0..self.spans.len() {
                    let span = self.spans[span_idx].span;
                    let jump = (span.0 as i64 - arena[id].last_end - 1).abs();
                    if distortion_limit.is_some_and(|d| jump > d as i64)
                        || !arena[id].coverage.is_free(span)
                    {
                        continue;
                    }
                    let coverage = arena[id].coverage.with(span);
                    let future = self.future.of_coverage(&coverage);
                    let target = covered + span.1 - span.0 + 1;
                    for opt_idx in 0..self.spans[span_idx].options.len() {
                        let h = &arena[id];
                        let (context, prev_lm) = (h.context, h.lm.clone());
                        let classifier = self
                            .evaluate_classifier(span_idx, opt_idx, context)
                            .expect("option index in range");
                        let o = &self.spans[span_idx].options[opt_idx];
                        let mut delta = [0.0; NUM_FEATURES];
                        delta[TM_TGS] = o.option.logp_tgt_given_src;
                        delta[TM_SGT] = o.option.logp_src_given_tgt;
                        let mut state = prev_lm;
                        for &w in &o.lm_ids {
                            let (s, next) = lm.advance(&state, w);
                            delta[LM] += s;
                            state = next;
                        }
                        delta[WORD_PENALTY] = -(o.lm_ids.len() as f64);
                        delta[PHRASE_PENALTY] = 1.0;
                        delta[DISTORTION] = -(jump as f64);
                        delta[CLASSIFIER] = classifier;
                        let next_ctx = self.next_context(context, span_idx, opt_idx);

                        let h = &arena[id];
                        let mut features = h.features;
                        for (f, d) in features.iter_mut().zip(&delta) {
                            *f += d;
                        }
                        let hyp = Hypothesis {
                            coverage: coverage.clone(),
                            lm: state,
                            context: next_ctx,
                            last_end: span.1 as i64,
                            score: h.score + weights.dot(&delta),
                            future,
                            features,
                            back: Some((id, span_idx, opt_idx)),
                        };
                        let key = (
                            hyp.coverage.clone(),
                            hyp.last_end,
                            hyp.lm.clone(),
                            hyp.context,
                        );
                        match recombination[target].get(&key) {
                            Some(&pos) => {
                                let existing = stacks[target][pos];
                                if hyp.score > arena[existing].score {
                                    arena.push(hyp);
                                    stacks[target][pos] = arena.len() - 1;
                                }
                            }
                            None => {
                                arena.push(hyp);
                                recombination[target].insert(key, stacks[target].len());
                                stacks[target].push(arena.len() - 1);
                            }
                        }
                    }
                }
            }
        }

        let mut best: Option<(usize, f64, f64)> = None;
        for &id in &stacks[n] {
            let end = lm.score_end(&arena[id].lm);
            let total = arena[id].score + weights.0[LM] * end;
            if best.is_none_or(|(_, b, _)| total > b) {
                best = Some((id, total, end));
            }
        }
        let (id, total, end) = best?;
        let mut features = arena[id].features;
        features[LM] += end;

        let mut steps = Vec::new();
        let mut cursor = id;
        while let Some((prev, span_idx, opt_idx)) = arena[cursor].back {
            steps.push((span_idx, opt_idx));
            cursor = prev;
        }
        steps.reverse();
        let mut words = Vec::new();
        let mut phrases = Vec::new();
        for (span_idx, opt_idx) in steps {
            let s = &self.spans[span_idx];
            let o = &s.options[opt_idx].option;
            words.extend(o.target_phrase.iter().cloned());
            phrases.push((s.span, o.target_forms()));
        }
        Some(Translation {
            words,
            total_score: total,
            features,
            phrases,
            stats: self.caches.stats,
        })
    }
}

/// Per-sentence trace line: feature breakdown and cache counters.
pub fn trace_line(index: usize, t: &Translation) -> String {
    let mut line = format!("sentence={index} total={}", t.total_score);
    for (name, v) in FEATURE_NAMES.iter().zip(t.features) {
        line.push_str(&format!(" {name}={v}"));
    }
    let s = t.stats;
    line.push_str(&format!(
        " extractions={} queries={} result_hits={} result_misses={} state_misses={}",
        s.feature_extractions, s.classifier_queries, s.result_hits, s.result_misses, s.state_misses
    ));
    line
}
