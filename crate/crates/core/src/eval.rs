//! BLEU, intrinsic phrase-classification accuracy and the naive versus
//! cached decoding comparison.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::classifier::{argmax, LinearModel};
use crate::corpus::{AlignedSentencePair, Sentence};
use crate::decoder::{CacheStats, Decoder, DecoderConfig};
use crate::error::{Error, Result};
use crate::examples::{instances, ExtractionStats};
use crate::features::FeatureConfig;
use crate::phrases::PhraseTable;

pub const BLEU_ORDER: usize = 4;

/// Corpus-level n-gram statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [u64; BLEU_ORDER],
    pub totals: [u64; BLEU_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl BleuStats {
    pub fn sentence<S: AsRef<str>>(hyp: &[S], reference: &[S]) -> BleuStats {
        let mut stats = BleuStats {
            hyp_len: hyp.len() as u64,
            ref_len: reference.len() as u64,
            ..BleuStats::default()
        };
        for n in 1..=BLEU_ORDER {
            let ref_counts = ngram_counts(reference, n);
            for (gram, c) in ngram_counts(hyp, n) {
                stats.matches[n - 1] += c.min(ref_counts.get(&gram).copied().unwrap_or(0));
                stats.totals[n - 1] += c;
            }
        }
        stats
    }

    pub fn add(&mut self, o: &BleuStats) {
        for n in 0..BLEU_ORDER {
            self.matches[n] += o.matches[n];
            self.totals[n] += o.totals[n];
        }
        self.hyp_len += o.hyp_len;
        self.ref_len += o.ref_len;
    }

    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 || self.matches.contains(&0) {
            return 0.0;
        }
        let log_precision: f64 = self
            .matches
            .iter()
            .zip(&self.totals)
            .map(|(&m, &t)| (m as f64 / t as f64).ln())
            .sum::<f64>()
            / BLEU_ORDER as f64;
        let brevity = (1.0 - self.ref_len as f64 / self.hyp_len as f64).min(0.0);
        (log_precision + brevity).exp()
    }
}

fn ngram_counts<S: AsRef<str>>(words: &[S], n: usize) -> HashMap<Vec<&str>, u64> {
    let mut counts = HashMap::new();
    for gram in words.windows(n) {
        *counts
            .entry(gram.iter().map(AsRef::as_ref).collect())
            .or_insert(0) += 1;
    }
    counts
}

/// Corpus BLEU with one reference per hypothesis, no smoothing.
pub fn bleu<S: AsRef<str>>(hypotheses: &[Vec<S>], references: &[Vec<S>]) -> Result<f64> {
    if hypotheses.is_empty() {
        return Err(Error::Empty("BLEU needs at least one sentence"));
    }
    if hypotheses.len() != references.len() {
        return Err(Error::LineCountMismatch {
            line: hypotheses.len().min(references.len()) + 1,
        });
    }
    let mut stats = BleuStats::default();
    for (h, r) in hypotheses.iter().zip(references) {
        stats.add(&BleuStats::sentence(h, r));
    }
    Ok(stats.score())
}

/// Splits each line on whitespace.
pub fn tokenize_lines(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicReport {
    pub model_accuracy: f64,
    pub baseline_accuracy: f64,
    pub instances: usize,
    pub stats: ExtractionStats,
}

/// Classifies every test phrase instance, with the target context taken from
/// the reference, and compares against always picking the most frequent
/// candidate.
pub fn intrinsic_accuracy(
    test: &[AlignedSentencePair],
    table: &PhraseTable,
    model: &LinearModel,
    config: &FeatureConfig,
    max_len: usize,
) -> Result<IntrinsicReport> {
    model.check_config(config)?;
    let bits = model.hash_bits();
    let per_sentence: Vec<(usize, usize, usize, ExtractionStats)> = test
        .par_iter()
        .map(|pair| {
            let mut stats = ExtractionStats::default();
            let mut model_hits = 0;
            let mut baseline_hits = 0;
            let found = instances(pair, table, max_len, false, &mut stats);
            for inst in &found {
                let example = inst.record(pair, config).hashed(bits);
                if argmax(&example.scores(model)) == inst.gold {
                    model_hits += 1;
                }
                let counts: Vec<f64> = inst
                    .candidates
                    .iter()
                    .map(|o| o.pair_count as f64)
                    .collect();
                if argmax(&counts) == inst.gold {
                    baseline_hits += 1;
                }
            }
            (found.len(), model_hits, baseline_hits, stats)
        })
        .collect();
    let mut stats = ExtractionStats::default();
    let (mut total, mut model_hits, mut baseline_hits) = (0, 0, 0);
    for (n, m, b, s) in per_sentence {
        total += n;
        model_hits += m;
        baseline_hits += b;
        stats.add(&s);
    }
    if total == 0 {
        return Err(Error::Empty("no intrinsic evaluation instances"));
    }
    Ok(IntrinsicReport {
        model_accuracy: model_hits as f64 / total as f64,
        baseline_accuracy: baseline_hits as f64 / total as f64,
        instances: total,
        stats,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceComparison {
    pub same_output: bool,
    pub score_delta: f64,
    pub naive_seconds: f64,
    pub cached_seconds: f64,
    pub naive_stats: CacheStats,
    pub cached_stats: CacheStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheReport {
    pub sentences: Vec<SentenceComparison>,
}

impl CacheReport {
    pub fn all_equal(&self) -> bool {
        self.sentences.iter().all(|s| s.same_output)
    }

    pub fn max_score_delta(&self) -> f64 {
        self.sentences
            .iter()
            .map(|s| s.score_delta)
            .fold(0.0, f64::max)
    }

    pub fn naive_seconds(&self) -> f64 {
        self.sentences.iter().map(|s| s.naive_seconds).sum()
    }

    pub fn cached_seconds(&self) -> f64 {
        self.sentences.iter().map(|s| s.cached_seconds).sum()
    }

    pub fn speedup(&self) -> f64 {
        self.naive_seconds() / self.cached_seconds().max(f64::MIN_POSITIVE)
    }

    pub fn naive_extractions(&self) -> u64 {
        self.sentences
            .iter()
            .map(|s| s.naive_stats.feature_extractions)
            .sum()
    }

    pub fn cached_extractions(&self) -> u64 {
        self.sentences
            .iter()
            .map(|s| s.cached_stats.feature_extractions)
            .sum()
    }

    /// Cached extraction calls as a fraction of naive ones.
    pub fn extraction_ratio(&self) -> f64 {
        self.cached_extractions() as f64 / self.naive_extractions().max(1) as f64
    }

    pub fn summary(&self) -> Vec<(String, String)> {
        vec![
            ("sentences".into(), self.sentences.len().to_string()),
            (
                "equal_outputs".into(),
                self.sentences
                    .iter()
                    .filter(|s| s.same_output)
                    .count()
                    .to_string(),
            ),
            ("max_score_delta".into(), self.max_score_delta().to_string()),
            ("naive_seconds".into(), self.naive_seconds().to_string()),
            ("cached_seconds".into(), self.cached_seconds().to_string()),
            ("speedup".into(), self.speedup().to_string()),
            (
                "naive_extractions".into(),
                self.naive_extractions().to_string(),
            ),
            (
                "cached_extractions".into(),
                self.cached_extractions().to_string(),
            ),
            (
                "extraction_ratio".into(),
                self.extraction_ratio().to_string(),
            ),
        ]
    }

    /// One line per sentence.
    pub fn lines(&self) -> Vec<String> {
        self.sentences
            .iter()
            .enumerate()
            .map(|(i, s)| {
                format!(
                    "sentence={i} equal={} delta={} naive_s={:.6} cached_s={:.6} naive_extractions={} cached_extractions={}",
                    s.same_output,
                    s.score_delta,
                    s.naive_seconds,
                    s.cached_seconds,
                    s.naive_stats.feature_extractions,
                    s.cached_stats.feature_extractions
                )
            })
            .collect()
    }
}

/// Decodes every sentence with and without classifier caches, one sentence
/// at a time on the calling thread so timings are comparable.
pub fn cache_equivalence_report(
    decoder: &Decoder<'_>,
    sentences: &[Sentence],
) -> Result<CacheReport> {
    if sentences.len() < 10 {
        return Err(Error::Config(
            "the cache report needs at least 10 sentences".into(),
        ));
    }
    let with_mode = |naive| {
        Decoder::new(
            decoder.table,
            decoder.lm,
            decoder.model,
            decoder.features,
            decoder.weights,
            DecoderConfig {
                naive,
                ..decoder.config.clone()
            },
        )
    };
    let (naive, cached) = (with_mode(true)?, with_mode(false)?);
    let mut rows = Vec::with_capacity(sentences.len());
    for s in sentences {
        let t0 = Instant::now();
        let a = naive.decode(s)?;
        let naive_seconds = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let b = cached.decode(s)?;
        let cached_seconds = t1.elapsed().as_secs_f64();
        rows.push(SentenceComparison {
            same_output: a.text() == b.text(),
            score_delta: (a.total_score - b.total_score).abs(),
            naive_seconds,
            cached_seconds,
            naive_stats: a.stats,
            cached_stats: b.stats,
        });
    }
    Ok(CacheReport { sentences: rows })
}

/// Writes `key<TAB>value` lines.
pub fn write_summary(path: impl AsRef<Path>, entries: &[(String, String)]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (k, v) in entries {
        writeln!(w, "{k}\t{v}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
