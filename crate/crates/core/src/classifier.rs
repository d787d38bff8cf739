//! The global linear phrase-translation model.
//!
//! A candidate's score is `w · [T ∪ (S_src × T) ∪ (S_tgt × T)]`; candidates of
//! one source span are normalized with a softmax. Training treats every
//! candidate as an independent binary logistic problem (gold vs. rest) and
//! keeps the pass with the best held-out accuracy.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{cross_index, FeatureConfig, FeatureSet, Namespace};

pub const DEFAULT_PASSES: usize = 10;
pub const DEFAULT_ETA0: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>,
    hash_bits: u32,
    fingerprint: String,
    eta0: f64,
    passes_selected: usize,
}

impl LinearModel {
    pub fn zeros(hash_bits: u32, fingerprint: impl Into<String>) -> Self {
        assert!((1..=31).contains(&hash_bits), "hash_bits must be in 1..=31");
        LinearModel {
            weights: vec![0.0; 1 << hash_bits],
            hash_bits,
            fingerprint: fingerprint.into(),
            eta0: 0.0,
            passes_selected: 0,
        }
    }

    pub fn for_config(hash_bits: u32, config: &FeatureConfig) -> Self {
        LinearModel::zeros(hash_bits, config.fingerprint())
    }

    pub fn hash_bits(&self) -> u32 {
        self.hash_bits
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn passes_selected(&self) -> usize {
        self.passes_selected
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, index: u32) -> f64 {
        self.weights[index as usize]
    }

    pub fn set_weight(&mut self, index: u32, value: f64) {
        self.weights[index as usize] = value;
    }

    pub fn check_config(&self, config: &FeatureConfig) -> Result<()> {
        let fp = config.fingerprint();
        if fp != self.fingerprint {
            return Err(Error::FingerprintMismatch {
                model: self.fingerprint.clone(),
                config: fp,
            });
        }
        Ok(())
    }

    pub fn dot(&self, set: &FeatureSet) -> f64 {
        set.items
            .iter()
            .map(|&(i, v)| self.weights[i as usize] * v)
            .sum()
    }

    /// `w · cross(shared, translation)` without materializing the product.
    pub fn cross_dot(&self, shared: &FeatureSet, translation: &FeatureSet) -> f64 {
        let mut sum = 0.0;
        for &(s, sv) in &shared.items {
            for &(t, tv) in &translation.items {
                sum += self.weights[cross_index(s, t, self.hash_bits) as usize] * sv * tv;
            }
        }
        sum
    }

    /// The part of the score that does not depend on target context.
    pub fn source_part(&self, shared_src: &FeatureSet, translation: &FeatureSet) -> f64 {
        self.dot(translation) + self.cross_dot(shared_src, translation)
    }

    pub fn target_part(&self, shared_tgt: &FeatureSet, translation: &FeatureSet) -> f64 {
        self.cross_dot(shared_tgt, translation)
    }

    pub fn raw_score(
        &self,
        shared_src: &FeatureSet,
        shared_tgt: &FeatureSet,
        translation: &FeatureSet,
    ) -> f64 {
        self.source_part(shared_src, translation) + self.target_part(shared_tgt, translation)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(
            w,
            "bits={} config={} eta0={} passes_selected={}",
            self.hash_bits, self.fingerprint, self.eta0, self.passes_selected
        )?;
        for (i, &v) in self.weights.iter().enumerate() {
            if v != 0.0 {
                writeln!(w, "{i}\t{v}")?;
            }
        }
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<LinearModel> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or(Error::Empty("model file"))?
            .map_err(|e| Error::io(path, e))?;
        let bad_header = || Error::format(format!("bad model header {header:?}"));
        let (mut bits, mut fp, mut eta0, mut passes) = (None, None, None, None);
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("bits", v)) => bits = v.parse::<u32>().ok().filter(|b| (1..=31).contains(b)),
                Some(("config", v)) => fp = Some(v.to_string()),
                Some(("eta0", v)) => eta0 = v.parse::<f64>().ok(),
                Some(("passes_selected", v)) => passes = v.parse::<usize>().ok(),
                _ => return Err(bad_header()),
            }
        }
        let mut model =
            LinearModel::zeros(bits.ok_or_else(bad_header)?, fp.ok_or_else(bad_header)?);
        model.eta0 = eta0.ok_or_else(bad_header)?;
        model.passes_selected = passes.ok_or_else(bad_header)?;
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let bad = || Error::format(format!("{}:{}: bad weight line", path.display(), n + 2));
            let (i, v) = line.split_once('\t').ok_or_else(bad)?;
            let i: usize = i.parse().map_err(|_| bad())?;
            let v: f64 = v.parse().map_err(|_| bad())?;
            if i >= model.weights.len() || !v.is_finite() {
                return Err(bad());
            }
            model.weights[i] = v;
        }
        Ok(model)
    }
}

/// Softmax with max-subtraction.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Natural-log softmax, computed as `s - max - ln Σ exp(s - max)`.
pub fn log_softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = scores.iter().map(|&s| (s - max).exp()).sum::<f64>().ln();
    scores.iter().map(|&s| s - max - log_z).collect()
}

/// Index of the highest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn predict_distribution(
    model: &LinearModel,
    shared_src: &FeatureSet,
    shared_tgt: &FeatureSet,
    candidates: &[FeatureSet],
) -> Vec<f64> {
    let scores: Vec<f64> = candidates
        .iter()
        .map(|c| model.raw_score(shared_src, shared_tgt, c))
        .collect();
    softmax(&scores)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub features: FeatureSet,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub shared_src: FeatureSet,
    pub shared_tgt: FeatureSet,
    pub candidates: Vec<Candidate>,
}

impl TrainingExample {
    /// Index of the first zero-loss candidate.
    pub fn gold_index(&self) -> Option<usize> {
        self.candidates.iter().position(|c| c.loss == 0.0)
    }

    pub fn scores(&self, model: &LinearModel) -> Vec<f64> {
        self.candidates
            .iter()
            .map(|c| model.raw_score(&self.shared_src, &self.shared_tgt, &c.features))
            .collect()
    }
}

/// Feature keys of one example as stored in example files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExampleRecord {
    pub shared_src: Vec<String>,
    pub shared_tgt: Vec<String>,
    pub candidates: Vec<(u8, Vec<String>)>,
}

impl ExampleRecord {
    pub fn gold_index(&self) -> Option<usize> {
        self.candidates.iter().position(|(loss, _)| *loss == 0)
    }

    pub fn hashed(&self, hash_bits: u32) -> TrainingExample {
        TrainingExample {
            shared_src: FeatureSet::from_keys(Namespace::SourceShared, &self.shared_src, hash_bits),
            shared_tgt: FeatureSet::from_keys(Namespace::TargetShared, &self.shared_tgt, hash_bits),
            candidates: self
                .candidates
                .iter()
                .map(|(loss, keys)| Candidate {
                    features: FeatureSet::from_keys(Namespace::Translation, keys, hash_bits),
                    loss: *loss as f64,
                })
                .collect(),
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        fn line<W: Write>(w: &mut W, head: &str, keys: &[String]) -> std::io::Result<()> {
            w.write_all(head.as_bytes())?;
            for k in keys {
                w.write_all(b" ")?;
                w.write_all(k.as_bytes())?;
            }
            w.write_all(b"\n")
        }
        line(w, "shared |s", &self.shared_src)?;
        line(w, "shared_t |g", &self.shared_tgt)?;
        for (loss, keys) in &self.candidates {
            line(w, &format!("{loss} |t"), keys)?;
        }
        w.write_all(b"\n")
    }

    fn parse_block(lines: &[String]) -> Result<ExampleRecord> {
        fn keys_after(line: &str, head: &str) -> Option<Vec<String>> {
            let rest = line.strip_prefix(head)?;
            if !rest.is_empty() && !rest.starts_with(' ') {
                return None;
            }
            Some(rest.split_whitespace().map(str::to_string).collect())
        }
        if lines.len() < 2 {
            return Err(Error::format(
                "example block needs shared and shared_t lines",
            ));
        }
        let shared_src = keys_after(&lines[0], "shared |s")
            .ok_or_else(|| Error::format(format!("expected `shared |s`, got {:?}", lines[0])))?;
        let shared_tgt = keys_after(&lines[1], "shared_t |g")
            .ok_or_else(|| Error::format(format!("expected `shared_t |g`, got {:?}", lines[1])))?;
        let mut candidates = Vec::new();
        for line in &lines[2..] {
            let (loss, rest) = line
                .split_once(' ')
                .ok_or_else(|| Error::format(format!("bad candidate line {line:?}")))?;
            let loss: u8 = match loss {
                "0" => 0,
                "1" => 1,
                _ => return Err(Error::format(format!("loss must be 0 or 1 in {line:?}"))),
            };
            let keys = keys_after(rest, "|t")
                .ok_or_else(|| Error::format(format!("bad candidate line {line:?}")))?;
            candidates.push((loss, keys));
        }
        let golds = candidates.iter().filter(|(l, _)| *l == 0).count();
        if !candidates.is_empty() && golds != 1 {
            return Err(Error::format(format!(
                "expected one zero-loss candidate, found {golds}"
            )));
        }
        Ok(ExampleRecord {
            shared_src,
            shared_tgt,
            candidates,
        })
    }
}

pub fn write_example_records<'a, W, I>(w: &mut W, records: I) -> std::io::Result<usize>
where
    W: Write,
    I: IntoIterator<Item = &'a ExampleRecord>,
{
    let mut n = 0;
    for r in records {
        r.write_to(w)?;
        n += 1;
    }
    Ok(n)
}

pub fn parse_example_records<R: BufRead>(reader: R) -> Result<Vec<ExampleRecord>> {
    let mut out = Vec::new();
    let mut block: Vec<String> = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io("<examples>", e))?;
        if line.trim().is_empty() {
            if !block.is_empty() {
                out.push(ExampleRecord::parse_block(&block)?);
                block.clear();
            }
        } else {
            block.push(line);
        }
    }
    if !block.is_empty() {
        out.push(ExampleRecord::parse_block(&block)?);
    }
    Ok(out)
}

pub fn read_example_records(path: impl AsRef<Path>) -> Result<Vec<ExampleRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_example_records(BufReader::new(file))
        .map_err(|e| Error::format(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub passes: usize,
    pub eta0: f64,
    pub shards: usize,
    pub seed: u64,
    pub l2: f64,
    pub hash_bits: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            passes: DEFAULT_PASSES,
            eta0: DEFAULT_ETA0,
            shards: 1,
            seed: 1,
            l2: 0.0,
            hash_bits: crate::features::DEFAULT_HASH_BITS,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.passes == 0 {
            return Err(Error::Config("passes must be at least 1".into()));
        }
        if self.eta0.is_nan() || self.l2.is_nan() || self.eta0 < 0.0 || self.l2 < 0.0 {
            return Err(Error::Config("eta0 and l2 must be non-negative".into()));
        }
        if !(1..=31).contains(&self.hash_bits) {
            return Err(Error::Config("hash bits must be in 1..=31".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Held-out accuracy after each pass.
    pub heldout_accuracy: Vec<f64>,
    /// 1-based pass whose weights were kept.
    pub best_pass: usize,
    pub skipped_examples: usize,
    pub empty_shards: usize,
}

/// Sparse gradient of `log(1 + exp(-y·s))` for one candidate, where
/// `y = +1` for the zero-loss candidate and `-1` otherwise. Duplicate
/// indices appear once per occurrence.
pub fn logistic_gradient(
    weights: &[f64],
    hash_bits: u32,
    example: &TrainingExample,
    candidate: usize,
) -> Vec<(u32, f64)> {
    let cand = &example.candidates[candidate];
    let mut grad = Vec::new();
    let score = score_with(weights, hash_bits, example, &cand.features);
    let y = if cand.loss == 0.0 { 1.0 } else { -1.0 };
    let dloss = -y / (1.0 + (y * score).exp());
    for &(t, tv) in &cand.features.items {
        grad.push((t, dloss * tv));
    }
    for shared in [&example.shared_src, &example.shared_tgt] {
        for &(s, sv) in &shared.items {
            for &(t, tv) in &cand.features.items {
                grad.push((cross_index(s, t, hash_bits), dloss * sv * tv));
            }
        }
    }
    grad
}

fn score_with(weights: &[f64], hash_bits: u32, example: &TrainingExample, t: &FeatureSet) -> f64 {
    let dot = |set: &FeatureSet| -> f64 {
        set.items
            .iter()
            .map(|&(i, v)| weights[i as usize] * v)
            .sum()
    };
    let cross = |shared: &FeatureSet| -> f64 {
        let mut sum = 0.0;
        for &(s, sv) in &shared.items {
            for &(ti, tv) in &t.items {
                sum += weights[cross_index(s, ti, hash_bits) as usize] * sv * tv;
            }
        }
        sum
    };
    (dot(t) + cross(&example.shared_src)) + cross(&example.shared_tgt)
}

/// One SGD pass; `step` is the global update counter used for
/// `eta_t = eta0 / sqrt(t)`.
fn sgd_pass(
    weights: &mut [f64],
    step: &mut u64,
    examples: &[TrainingExample],
    cfg: &TrainConfig,
    skipped: &mut usize,
) {
    for ex in examples {
        if ex.candidates.is_empty() {
            *skipped += 1;
            continue;
        }
        for c in 0..ex.candidates.len() {
            *step += 1;
            let eta = cfg.eta0 / (*step as f64).sqrt();
            for (i, g) in logistic_gradient(weights, cfg.hash_bits, ex, c) {
                let w = &mut weights[i as usize];
                *w -= eta * (g + cfg.l2 * *w);
            }
        }
    }
}

fn accuracy_with(weights: &[f64], hash_bits: u32, examples: &[TrainingExample]) -> f64 {
    let mut correct = 0usize;
    let mut total = 0usize;
    for ex in examples {
        let Some(gold) = ex.gold_index() else {
            continue;
        };
        total += 1;
        let scores: Vec<f64> = ex
            .candidates
            .iter()
            .map(|c| score_with(weights, hash_bits, ex, &c.features))
            .collect();
        if argmax(&scores) == gold {
            correct += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

/// Fraction of examples whose gold candidate gets the highest score.
pub fn heldout_accuracy(model: &LinearModel, examples: &[TrainingExample]) -> f64 {
    accuracy_with(&model.weights, model.hash_bits, examples)
}

struct Selection {
    best: Option<(f64, usize, Vec<f64>)>,
    report: TrainReport,
}

impl Selection {
    fn new() -> Self {
        Selection {
            best: None,
            report: TrainReport::default(),
        }
    }

    fn observe(&mut self, pass: usize, weights: &[f64], heldout: &[TrainingExample], bits: u32) {
        let acc = accuracy_with(weights, bits, heldout);
        self.report.heldout_accuracy.push(acc);
        if self.best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
            self.best = Some((acc, pass, weights.to_vec()));
        }
    }

    fn finish(mut self, cfg: &TrainConfig, fingerprint: &str) -> (LinearModel, TrainReport) {
        let (_, pass, weights) = self.best.expect("at least one pass");
        self.report.best_pass = pass;
        let model = LinearModel {
            weights,
            hash_bits: cfg.hash_bits,
            fingerprint: fingerprint.to_string(),
            eta0: cfg.eta0,
            passes_selected: pass,
        };
        (model, self.report)
    }
}

/// Sequential training over `examples` in the given order.
pub fn train(
    examples: &[TrainingExample],
    heldout: &[TrainingExample],
    cfg: &TrainConfig,
    fingerprint: &str,
) -> Result<(LinearModel, TrainReport)> {
    cfg.validate()?;
    if examples.is_empty() || heldout.is_empty() {
        return Err(Error::Empty("training and held-out examples are required"));
    }
    let mut weights = vec![0.0; 1 << cfg.hash_bits];
    let mut step = 0u64;
    let mut skipped = 0;
    let mut selection = Selection::new();
    for pass in 1..=cfg.passes {
        sgd_pass(&mut weights, &mut step, examples, cfg, &mut skipped);
        selection.observe(pass, &weights, heldout, cfg.hash_bits);
    }
    selection.report.skipped_examples = skipped;
    Ok(selection.finish(cfg, fingerprint))
}

/// Data-parallel training: every worker runs one pass over its shard from
/// the shared weights, then the weights are replaced by the uniform average
/// of the workers'. Each worker keeps its own update counter.
pub fn train_sharded(
    shards: &[Vec<TrainingExample>],
    heldout: &[TrainingExample],
    cfg: &TrainConfig,
    fingerprint: &str,
) -> Result<(LinearModel, TrainReport)> {
    cfg.validate()?;
    let active: Vec<&[TrainingExample]> = shards
        .iter()
        .filter(|s| !s.is_empty())
        .map(Vec::as_slice)
        .collect();
    if active.is_empty() || heldout.is_empty() {
        return Err(Error::Empty("training and held-out examples are required"));
    }
    let empty_shards = shards.len() - active.len();
    let mut weights = vec![0.0; 1 << cfg.hash_bits];
    let mut steps = vec![0u64; active.len()];
    let mut skipped = 0;
    let mut selection = Selection::new();
    for pass in 1..=cfg.passes {
        let results: Vec<(Vec<f64>, u64, usize)> = std::thread::scope(|scope| {
            let handles: Vec<_> = active
                .iter()
                .zip(&steps)
                .map(|(shard, &step)| {
                    let start = &weights;
                    scope.spawn(move || {
                        let mut local = start.clone();
                        let mut step = step;
                        let mut skipped = 0;
                        sgd_pass(&mut local, &mut step, shard, cfg, &mut skipped);
                        (local, step, skipped)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect()
        });
        let n = results.len();
        let mut results = results.into_iter();
        let (first, step0, sk0) = results.next().expect("one worker");
        steps[0] = step0;
        skipped += sk0;
        weights = first;
        if n > 1 {
            for (k, (local, step, sk)) in results.enumerate() {
                steps[k + 1] = step;
                skipped += sk;
                for (w, l) in weights.iter_mut().zip(&local) {
                    *w += l;
                }
            }
            let scale = n as f64;
            for w in weights.iter_mut() {
                *w /= scale;
            }
        }
        selection.observe(pass, &weights, heldout, cfg.hash_bits);
    }
    selection.report.skipped_examples = skipped;
    selection.report.empty_shards = empty_shards;
    Ok(selection.finish(cfg, fingerprint))
}
