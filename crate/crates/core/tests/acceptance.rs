//! Acceptance checks. Each check prints one PASS or FAIL line; the process
//! exits non-zero if any check fails.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ctxmt::classifier::{
    logistic_gradient, predict_distribution, train, train_sharded, Candidate, LinearModel,
    TrainConfig, TrainingExample,
};
use ctxmt::corpus::{AlignedSentencePair, FactoredWord, Sentence};
use ctxmt::decoder::{Decoder, DecoderConfig, DecoderWeights, FEATURE_NAMES, NUM_FEATURES};
use ctxmt::eval::{bleu, cache_equivalence_report, intrinsic_accuracy};
use ctxmt::examples::{
    generate_corpus_examples, gold_translation, instances, shard_records, ExtractionStats,
};
use ctxmt::features::{
    extract_source_shared, extract_target_shared, extract_translation, ContextWord, FeatureConfig,
    FeatureSet, Namespace, TargetContext,
};
use ctxmt::lm::{train_lm, NGramModel};
use ctxmt::phrases::{build_phrase_table, PhraseTable, Span, TranslationOption};
use ctxmt::synthetic::{
    agreement_corpus, pair_lines, sense_corpus, toy_corpus, toy_grammar, toy_sentences,
};

const TOY_BITS: u32 = 16;
const TOY_MAX_LEN: usize = 2;
const LEARN_BITS: u32 = 18;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

struct System {
    table: PhraseTable,
    lm: NGramModel,
    model: LinearModel,
    config: FeatureConfig,
}

impl System {
    fn decoder(&self, config: DecoderConfig) -> Decoder<'_> {
        Decoder::new(
            &self.table,
            &self.lm,
            &self.model,
            &self.config,
            DecoderWeights::default(),
            DecoderConfig {
                max_phrase_len: TOY_MAX_LEN,
                ..config
            },
        )
        .expect("config matches model")
    }
}

fn hashed(
    corpus: &[AlignedSentencePair],
    table: &PhraseTable,
    config: &FeatureConfig,
    loo: bool,
    bits: u32,
    max_len: usize,
) -> Vec<TrainingExample> {
    generate_corpus_examples(corpus, table, config, max_len, loo)
        .0
        .iter()
        .map(|r| r.hashed(bits))
        .collect()
}

fn toy_system() -> System {
    let corpus = toy_corpus(300, 1);
    let dev = toy_corpus(40, 2);
    let table = build_phrase_table(&corpus, TOY_MAX_LEN).unwrap();
    let lm = train_lm(corpus.iter().map(|p| &p.target), 3).unwrap();
    let config = FeatureConfig::full();
    let examples = hashed(&corpus, &table, &config, true, TOY_BITS, TOY_MAX_LEN);
    let heldout = hashed(&dev, &table, &config, false, TOY_BITS, TOY_MAX_LEN);
    let cfg = TrainConfig {
        passes: 3,
        hash_bits: TOY_BITS,
        ..TrainConfig::default()
    };
    let (model, _) = train(&examples, &heldout, &cfg, &config.fingerprint()).unwrap();
    System {
        table,
        lm,
        model,
        config,
    }
}

fn random_set(rng: &mut ChaCha8Rng, ns: Namespace, bits: u32) -> FeatureSet {
    let n = rng.gen_range(0..12);
    let keys: Vec<String> = (0..n)
        .map(|_| format!("k{}", rng.gen_range(0..200)))
        .collect();
    FeatureSet::from_keys(ns, &keys, bits)
}

fn random_model(rng: &mut ChaCha8Rng, bits: u32, scale: f64) -> LinearModel {
    let mut model = LinearModel::zeros(bits, "random");
    for i in 0..(1u32 << bits) {
        model.set_weight(i, rng.gen_range(-scale..scale));
    }
    model
}

fn normalization(system: &System) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bits = 10;
    let mut worst: f64 = 0.0;
    for draw in 0..1000 {
        let scale = [0.1, 1.0, 10.0, 100.0][draw % 4];
        let model = random_model(&mut rng, bits, scale);
        let src = random_set(&mut rng, Namespace::SourceShared, bits);
        let tgt = random_set(&mut rng, Namespace::TargetShared, bits);
        let k = rng.gen_range(1..10);
        let candidates: Vec<FeatureSet> = (0..k)
            .map(|_| random_set(&mut rng, Namespace::Translation, bits))
            .collect();
        let p = predict_distribution(&model, &src, &tgt, &candidates);
        worst = worst.max((p.iter().sum::<f64>() - 1.0).abs());
    }

    let decoder = system.decoder(DecoderConfig::default());
    let targets: Vec<FactoredWord> = system
        .table
        .source_keys()
        .iter()
        .flat_map(|k| system.table.lookup_key(k).iter())
        .flat_map(|o| o.target_phrase.iter().cloned())
        .collect();
    let mut decoder_worst: f64 = 0.0;
    let mut distributions = 0;
    for sentence in toy_sentences(20, 9) {
        let mut search = decoder.search(&sentence).unwrap();
        for _ in 0..5 {
            let pick = |rng: &mut ChaCha8Rng| ContextWord {
                word: targets[rng.gen_range(0..targets.len())].clone(),
                aligned: vec![sentence.words()[rng.gen_range(0..sentence.len())].clone()],
            };
            let ctx = TargetContext::new(pick(&mut rng), pick(&mut rng));
            let id = search.intern_context(ctx);
            for span in 0..search.spans().len() {
                let n = search.spans()[span].options.len();
                let total: f64 = (0..n)
                    .map(|j| search.evaluate_classifier(span, j, id).unwrap().exp())
                    .sum();
                decoder_worst = decoder_worst.max((total - 1.0).abs());
                distributions += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && decoder_worst <= 1e-9 && secs < 10.0,
        format!(
            "1000 draws max |sum-1| = {worst:.2e}; {distributions} decoder distributions max |sum-1| = {decoder_worst:.2e}; {secs:.2}s"
        ),
    )
}

fn cache_transparency(system: &System) -> Outcome {
    let start = Instant::now();
    let sentences = toy_sentences(50, 7);
    let decoder = system.decoder(DecoderConfig::default());
    let report = cache_equivalence_report(&decoder, &sentences).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = report.all_equal()
        && report.max_score_delta() <= 1e-9
        && report.extraction_ratio() <= 0.30
        && report.speedup() >= 2.0
        && secs < 120.0;
    outcome(
        ok,
        format!(
            "{} sentences, equal outputs: {}, max delta {:.2e}, extraction calls {} vs {} (ratio {:.3}), speedup {:.2}x, {secs:.1}s",
            report.sentences.len(),
            report.all_equal(),
            report.max_score_delta(),
            report.cached_extractions(),
            report.naive_extractions(),
            report.extraction_ratio(),
            report.speedup()
        ),
    )
}

/// Exhaustive search over every ordered segmentation and option choice,
/// scoring complete translations from scratch.
struct Oracle<'a> {
    system: &'a System,
    weights: DecoderWeights,
    sentence: &'a Sentence,
    options: Vec<(Span, Vec<TranslationOption>)>,
    distributions: HashMap<(Span, TargetContext), Vec<f64>>,
    best: f64,
    best_strings: Vec<String>,
}

fn feature(name: &str) -> usize {
    FEATURE_NAMES.iter().position(|n| *n == name).unwrap()
}

impl<'a> Oracle<'a> {
    fn new(system: &'a System, sentence: &'a Sentence) -> Self {
        let words = sentence.words();
        let mut options = Vec::new();
        for start in 0..words.len() {
            for end in start..words.len().min(start + TOY_MAX_LEN) {
                let forms: Vec<&str> = words[start..=end].iter().map(|w| w.form()).collect();
                let mut found = system.table.lookup(&forms).to_vec();
                if found.is_empty() && start == end {
                    found.push(TranslationOption::copy_through(&words[start]));
                }
                if !found.is_empty() {
                    options.push(((start, end), found));
                }
            }
        }
        Oracle {
            system,
            weights: DecoderWeights::default(),
            sentence,
            options,
            distributions: HashMap::new(),
            best: f64::NEG_INFINITY,
            best_strings: Vec::new(),
        }
    }

    fn context(words: &[ContextWord]) -> TargetContext {
        let at = |k: usize| {
            words
                .len()
                .checked_sub(k)
                .map(|i| words[i].clone())
                .unwrap_or_else(ContextWord::start)
        };
        TargetContext::new(at(1), at(2))
    }

    fn classifier(&mut self, which: usize, choice: usize, context: TargetContext) -> f64 {
        let (span, ref opts) = self.options[which];
        let key = (span, context);
        if !self.distributions.contains_key(&key) {
            let bits = self.system.model.hash_bits();
            let cfg = &self.system.config;
            let src = extract_source_shared(self.sentence, span, cfg, bits);
            let tgt = extract_target_shared(&key.1, cfg, bits);
            let cands: Vec<FeatureSet> = opts
                .iter()
                .map(|o| extract_translation(o, cfg, bits))
                .collect();
            let p = predict_distribution(&self.system.model, &src, &tgt, &cands);
            self.distributions.insert(key.clone(), p);
        }
        self.distributions[&key][choice].ln()
    }

    fn search(
        &mut self,
        covered: &mut Vec<bool>,
        last_end: i64,
        out: &mut Vec<ContextWord>,
        features: [f64; NUM_FEATURES],
    ) {
        if covered.iter().all(|&c| c) {
            let forms: Vec<&str> = out.iter().map(|w| w.word.form()).collect();
            let mut f = features;
            f[feature("lm")] = self.system.lm.score_sentence(&forms);
            let total = self.weights.dot(&f);
            let text = forms.join(" ");
            if total > self.best + 1e-9 {
                self.best = total;
                self.best_strings = vec![text];
            } else if (total - self.best).abs() <= 1e-9 {
                self.best = self.best.max(total);
                self.best_strings.push(text);
            }
            return;
        }
        for which in 0..self.options.len() {
            let (span, n) = (self.options[which].0, self.options[which].1.len());
            if (span.0..=span.1).any(|i| covered[i]) {
                continue;
            }
            for choice in 0..n {
                let classifier = self.classifier(which, choice, Self::context(out));
                let option = self.options[which].1[choice].clone();
                let mut f = features;
                f[feature("tm_tgt_given_src")] += option.logp_tgt_given_src;
                f[feature("tm_src_given_tgt")] += option.logp_src_given_tgt;
                f[feature("word_penalty")] -= option.target_phrase.len() as f64;
                f[feature("phrase_penalty")] += 1.0;
                f[feature("distortion")] -= (span.0 as i64 - last_end - 1).abs() as f64;
                f[feature("classifier")] += classifier;
                let pushed = option.target_phrase.len();
                for (j, word) in option.target_phrase.iter().enumerate() {
                    let aligned = option
                        .internal_alignment
                        .links()
                        .filter(|&(_, t)| t == j)
                        .map(|(s, _)| self.sentence.words()[span.0 + s].clone())
                        .collect();
                    out.push(ContextWord {
                        word: word.clone(),
                        aligned,
                    });
                }
                covered[span.0..=span.1].fill(true);
                self.search(covered, span.1 as i64, out, f);
                covered[span.0..=span.1].fill(false);
                out.truncate(out.len() - pushed);
            }
        }
    }
}

fn oracle_decoding(system: &System) -> Outcome {
    let start = Instant::now();
    let decoder = system.decoder(DecoderConfig {
        beam: 1_000_000,
        distortion_limit: None,
        ..DecoderConfig::default()
    });
    let grammar = toy_grammar(6);
    let mut failures = Vec::new();
    let mut ties = 0;
    for pair in &grammar {
        let sentence = &pair.source;
        let mut oracle = Oracle::new(system, sentence);
        oracle.search(
            &mut vec![false; sentence.len()],
            -1,
            &mut Vec::new(),
            [0.0; NUM_FEATURES],
        );
        let got = decoder.decode(sentence).unwrap();
        if oracle.best_strings.len() > 1 {
            ties += 1;
        }
        let same_score = (got.total_score - oracle.best).abs() <= 1e-9;
        let same_string = oracle.best_strings.contains(&got.text());
        if !(same_score && same_string) {
            failures.push(format!(
                "{:?}: decoder {} ({}) oracle {} ({:?})",
                sentence.forms().collect::<Vec<_>>(),
                got.total_score,
                got.text(),
                oracle.best,
                oracle.best_strings
            ));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs < 60.0,
        format!(
            "{} sentences, {} mismatches, {ties} with tied optima, {secs:.1}s{}",
            grammar.len(),
            failures.len(),
            failures
                .first()
                .map(|f| format!("; first: {f}"))
                .unwrap_or_default()
        ),
    )
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ctxmt"))
}

fn run_ok(cmd: &mut Command) {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "{:?} failed: {}",
        cmd,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_corpus(pairs: &[AlignedSentencePair], prefix: &Path) {
    let (mut s, mut t, mut a) = (String::new(), String::new(), String::new());
    for p in pairs {
        let (src, tgt, align) = pair_lines(p);
        s.push_str(&src);
        s.push('\n');
        t.push_str(&tgt);
        t.push('\n');
        a.push_str(&align);
        a.push('\n');
    }
    std::fs::write(prefix.with_extension("src"), s).unwrap();
    std::fs::write(prefix.with_extension("tgt"), t).unwrap();
    std::fs::write(prefix.with_extension("align"), a).unwrap();
}

fn corpus_args<'c>(cmd: &'c mut Command, prefix: &Path) -> &'c mut Command {
    cmd.arg("--src")
        .arg(prefix.with_extension("src"))
        .arg("--tgt")
        .arg(prefix.with_extension("tgt"))
        .arg("--align")
        .arg(prefix.with_extension("align"))
}

fn singleton_pairs() -> Vec<AlignedSentencePair> {
    (0..30)
        .map(|i| {
            let src = format!("a{i}|a{i}|S|-|- b{i}|b{i}|S|-|- c{i}|c{i}|S|-|-");
            let tgt = format!("x{i}|x{i}|T y{i}|y{i}|T the|the|D z{i}|z{i}|T");
            AlignedSentencePair::parse(&src, &tgt, "0-0 1-3 2-1").unwrap()
        })
        .collect()
}

fn extract_with_cli(
    pairs: &[AlignedSentencePair],
    dir: &Path,
    name: &str,
) -> Vec<ctxmt::classifier::ExampleRecord> {
    let prefix = dir.join(name);
    write_corpus(pairs, &prefix);
    let table = dir.join(format!("{name}.table"));
    let examples = dir.join(format!("{name}.examples"));
    run_ok(
        corpus_args(bin().arg("extract-phrases"), &prefix)
            .arg("--out")
            .arg(&table)
            .arg("--max-len")
            .arg("3"),
    );
    run_ok(
        corpus_args(bin().arg("extract-examples"), &prefix)
            .arg("--table")
            .arg(&table)
            .arg("--out")
            .arg(&examples)
            .arg("--max-len")
            .arg("3"),
    );
    ctxmt::classifier::read_example_records(&examples).unwrap()
}

fn leave_one_out() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let once = singleton_pairs();
    let single = extract_with_cli(&once, dir.path(), "once");
    let mut twice = once.clone();
    twice.extend(once.iter().cloned());
    let double = extract_with_cli(&twice, dir.path(), "twice");
    let one_gold = double
        .iter()
        .all(|r| r.candidates.iter().filter(|(loss, _)| *loss == 0).count() == 1);

    let table = build_phrase_table(&twice, 3).unwrap();
    let mut stats = ExtractionStats::default();
    let mut gold_matches = true;
    let mut checked = 0;
    for pair in &twice {
        for inst in instances(pair, &table, 3, true, &mut stats) {
            let gold = gold_translation(pair, inst.span).expect("instance has gold");
            let words = &pair.target.words()[gold.target_span.0..=gold.target_span.1];
            gold_matches &= inst.candidates[inst.gold].target_phrase.as_slice() == words;
            checked += 1;
        }
    }
    outcome(
        single.is_empty() && !double.is_empty() && one_gold && gold_matches && checked == double.len(),
        format!(
            "singletons: {} examples; duplicated: {} examples, one zero-loss candidate each: {one_gold}, gold equals alignment-derived phrase: {gold_matches}",
            single.len(),
            double.len()
        ),
    )
}

struct Split {
    train: Vec<AlignedSentencePair>,
    dev: Vec<AlignedSentencePair>,
    test: Vec<AlignedSentencePair>,
}

fn split(corpus: Vec<AlignedSentencePair>) -> Split {
    let test = corpus[400..].to_vec();
    let dev = corpus[350..400].to_vec();
    let train = corpus[..350].to_vec();
    Split { train, dev, test }
}

struct Learned {
    model_accuracy: f64,
    baseline_accuracy: f64,
}

fn learn(split: &Split, config: &FeatureConfig, shards: usize) -> Learned {
    let table = build_phrase_table(&split.train, 1).unwrap();
    let train_records = generate_corpus_examples(&split.train, &table, config, 1, true).0;
    let heldout = hashed(&split.dev, &table, config, false, LEARN_BITS, 1);
    let cfg = TrainConfig {
        hash_bits: LEARN_BITS,
        shards,
        ..TrainConfig::default()
    };
    let (model, _) = if shards == 1 {
        let examples: Vec<_> = train_records.iter().map(|r| r.hashed(LEARN_BITS)).collect();
        train(&examples, &heldout, &cfg, &config.fingerprint()).unwrap()
    } else {
        let parts: Vec<Vec<TrainingExample>> = shard_records(train_records, shards, 1)
            .iter()
            .map(|s| s.iter().map(|r| r.hashed(LEARN_BITS)).collect())
            .collect();
        train_sharded(&parts, &heldout, &cfg, &config.fingerprint()).unwrap()
    };
    let report = intrinsic_accuracy(&split.test, &table, &model, config, 1).unwrap();
    Learned {
        model_accuracy: report.model_accuracy,
        baseline_accuracy: report.baseline_accuracy,
    }
}

fn learning() -> Outcome {
    let full = FeatureConfig::full();
    let source_only = full.source_only();
    let sense = split(sense_corpus(500, 1));
    let s = learn(&sense, &source_only, 1);
    let agreement = split(agreement_corpus(500));
    let t = learn(&agreement, &full, 1);
    let src = learn(&agreement, &source_only, 1);
    outcome(
        s.model_accuracy >= 0.95
            && (s.baseline_accuracy - 0.5).abs() <= 0.05
            && t.model_accuracy >= 0.95
            && src.model_accuracy <= 0.6,
        format!(
            "sense: source-context model {:.3}, most-frequent {:.3}; agreement: target-context model {:.3}, source-only model {:.3}",
            s.model_accuracy, s.baseline_accuracy, t.model_accuracy, src.model_accuracy
        ),
    )
}

fn shard_equivalence() -> Outcome {
    let full = FeatureConfig::full();
    let sense = split(sense_corpus(500, 1));
    let table = build_phrase_table(&sense.train, 1).unwrap();
    let examples = hashed(&sense.train, &table, &full, true, LEARN_BITS, 1);
    let heldout = hashed(&sense.dev, &table, &full, false, LEARN_BITS, 1);
    let cfg = TrainConfig {
        hash_bits: LEARN_BITS,
        ..TrainConfig::default()
    };
    let (a, _) = train(&examples, &heldout, &cfg, "x").unwrap();
    let (b, _) = train_sharded(std::slice::from_ref(&examples), &heldout, &cfg, "x").unwrap();
    let identical = a
        .weights()
        .iter()
        .zip(b.weights())
        .all(|(x, y)| x.to_bits() == y.to_bits());

    let source_only = full.source_only();
    let agreement = split(agreement_corpus(500));
    let gaps = [
        (
            learn(&sense, &source_only, 1),
            learn(&sense, &source_only, 4),
        ),
        (learn(&agreement, &full, 1), learn(&agreement, &full, 4)),
    ];
    let worst = gaps
        .iter()
        .map(|(seq, sharded)| (seq.model_accuracy - sharded.model_accuracy).abs())
        .fold(0.0, f64::max);
    outcome(
        identical && worst <= 0.02,
        format!(
            "one shard bit-identical: {identical}; four shards vs sequential: sense {:.3} vs {:.3}, agreement {:.3} vs {:.3}",
            gaps[0].1.model_accuracy, gaps[0].0.model_accuracy, gaps[1].1.model_accuracy, gaps[1].0.model_accuracy
        ),
    )
}

fn loss(weights: &[f64], bits: u32, example: &TrainingExample, candidate: usize) -> f64 {
    let mut model = LinearModel::zeros(bits, "g");
    for (i, &w) in weights.iter().enumerate() {
        model.set_weight(i as u32, w);
    }
    let c = &example.candidates[candidate];
    let s = model.raw_score(&example.shared_src, &example.shared_tgt, &c.features);
    let y = if c.loss == 0.0 { 1.0 } else { -1.0 };
    (1.0 + (-y * s).exp()).ln()
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bits = 8;
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for point in 0..20 {
        let weights: Vec<f64> = (0..1 << bits).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let example = TrainingExample {
            shared_src: random_set(&mut rng, Namespace::SourceShared, bits),
            shared_tgt: random_set(&mut rng, Namespace::TargetShared, bits),
            candidates: (0..3)
                .map(|i| Candidate {
                    features: random_set(&mut rng, Namespace::Translation, bits),
                    loss: if i == point % 3 { 0.0 } else { 1.0 },
                })
                .collect(),
        };
        for c in 0..3 {
            let mut analytic: HashMap<u32, f64> = HashMap::new();
            for (i, g) in logistic_gradient(&weights, bits, &example, c) {
                *analytic.entry(i).or_insert(0.0) += g;
            }
            for (&i, &g) in &analytic {
                let h = 1e-6;
                let mut plus = weights.clone();
                plus[i as usize] += h;
                let mut minus = weights.clone();
                minus[i as usize] -= h;
                let numeric =
                    (loss(&plus, bits, &example, c) - loss(&minus, bits, &example, c)) / (2.0 * h);
                let scale = g.abs().max(numeric.abs());
                if scale > 1e-6 {
                    worst = worst.max((g - numeric).abs() / scale);
                }
                compared += 1;
            }
        }
    }

    // one update from zero weights on a single-candidate example
    let example = TrainingExample {
        shared_src: random_set(&mut rng, Namespace::SourceShared, bits),
        shared_tgt: FeatureSet::empty(Namespace::TargetShared),
        candidates: vec![Candidate {
            features: random_set(&mut rng, Namespace::Translation, bits),
            loss: 0.0,
        }],
    };
    let cfg = TrainConfig {
        passes: 1,
        eta0: 0.5,
        hash_bits: bits,
        ..TrainConfig::default()
    };
    let (model, _) = train(
        std::slice::from_ref(&example),
        std::slice::from_ref(&example),
        &cfg,
        "g",
    )
    .unwrap();
    let zero = vec![0.0; 1 << bits];
    let mut step_error: f64 = 0.0;
    for i in 0..(1usize << bits) {
        let h = 1e-6;
        let mut plus = zero.clone();
        plus[i] += h;
        let mut minus = zero.clone();
        minus[i] -= h;
        let numeric =
            (loss(&plus, bits, &example, 0) - loss(&minus, bits, &example, 0)) / (2.0 * h);
        let expected = -0.5 * numeric;
        let got = model.weights()[i];
        let scale = expected.abs().max(got.abs());
        if scale > 1e-6 {
            step_error = step_error.max((expected - got).abs() / scale);
        }
    }
    outcome(
        worst <= 1e-4 && step_error <= 1e-4 && compared > 100,
        format!("{compared} gradient entries at 20 points, max relative error {worst:.2e}; first SGD step max relative error {step_error:.2e}"),
    )
}

fn metrics() -> Outcome {
    let t = |s: &str| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
    let identity = bleu(&[t("a b c d")], &[t("a b c d")]).unwrap();
    let brevity = bleu(&[t("a b c d")], &[t("a b c d e")]).unwrap();
    let zero = bleu(&[t("a b c d")], &[t("a b c e")]).unwrap();
    outcome(
        identity == 1.0 && (brevity - 0.7788).abs() <= 1e-4 && zero == 0.0,
        format!("identity {identity}, brevity case {brevity:.4}, no 4-gram match {zero}"),
    )
}

fn pipeline(dir: &Path) -> (Vec<u8>, Vec<u8>) {
    let train_prefix = dir.join("train");
    let dev_prefix = dir.join("dev");
    let test_prefix = dir.join("test");
    for (prefix, n, seed) in [
        (&train_prefix, "200", "1"),
        (&dev_prefix, "30", "2"),
        (&test_prefix, "20", "3"),
    ] {
        run_ok(
            bin()
                .args([
                    "generate",
                    "--kind",
                    "toy",
                    "--sentences",
                    n,
                    "--seed",
                    seed,
                    "--prefix",
                ])
                .arg(prefix),
        );
    }
    let table = dir.join("table");
    let lm = dir.join("lm");
    let examples = dir.join("train.examples");
    let heldout = dir.join("dev.examples");
    let model = dir.join("model");
    let out = dir.join("out.txt");
    run_ok(
        corpus_args(bin().arg("extract-phrases"), &train_prefix)
            .args(["--max-len", "2", "--out"])
            .arg(&table),
    );
    run_ok(
        bin()
            .arg("train-lm")
            .arg("--input")
            .arg(train_prefix.with_extension("tgt"))
            .args(["--order", "3", "--out"])
            .arg(&lm),
    );
    run_ok(
        corpus_args(bin().arg("extract-examples"), &train_prefix)
            .args(["--max-len", "2", "--jobs", "2", "--table"])
            .arg(&table)
            .arg("--out")
            .arg(&examples),
    );
    run_ok(
        corpus_args(bin().arg("extract-examples"), &dev_prefix)
            .args(["--max-len", "2", "--no-leave-one-out", "--table"])
            .arg(&table)
            .arg("--out")
            .arg(&heldout),
    );
    run_ok(
        bin()
            .arg("train")
            .arg("--examples")
            .arg(&examples)
            .arg("--heldout")
            .arg(&heldout)
            .args([
                "--bits", "16", "--passes", "2", "--shards", "2", "--seed", "1", "--out",
            ])
            .arg(&model),
    );
    run_ok(
        bin()
            .arg("decode")
            .arg("--input")
            .arg(test_prefix.with_extension("src"))
            .arg("--table")
            .arg(&table)
            .arg("--lm")
            .arg(&lm)
            .arg("--model")
            .arg(&model)
            .args(["--max-len", "2", "--jobs", "3", "--out"])
            .arg(&out),
    );
    (std::fs::read(&model).unwrap(), std::fs::read(&out).unwrap())
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (model_a, out_a) = pipeline(a.path());
    let (model_b, out_b) = pipeline(b.path());
    let lines = String::from_utf8_lossy(&out_a).lines().count();
    outcome(
        model_a == model_b && out_a == out_b && lines == 20,
        format!(
            "model files identical: {}, translations identical: {} ({lines} lines)",
            model_a == model_b,
            out_a == out_b
        ),
    )
}

fn main() {
    let system = toy_system();
    type Check<'s> = (&'static str, Box<dyn Fn() -> Outcome + 's>);
    let checks: Vec<Check> = vec![
        ("normalization", Box::new(|| normalization(&system))),
        (
            "cache transparency",
            Box::new(|| cache_transparency(&system)),
        ),
        ("oracle decoding", Box::new(|| oracle_decoding(&system))),
        ("leave-one-out", Box::new(leave_one_out)),
        ("learning", Box::new(learning)),
        ("shard equivalence", Box::new(shard_equivalence)),
        ("gradient check", Box::new(gradient_check)),
        ("metric sanity", Box::new(metrics)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        let result = check();
        if !result.ok {
            failed += 1;
        }
        println!(
            "{} {name}: {}",
            if result.ok { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!(
        "{} of {} acceptance checks passed",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
