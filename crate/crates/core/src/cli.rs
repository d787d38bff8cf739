//! Command-line front end.
//!
//! Options can also come from a `key=value` file given with `--config`; its
//! entries are inserted before the command-line flags, so flags win.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classifier::{
    read_example_records, train, train_sharded, ExampleRecord, LinearModel, TrainConfig,
};
use crate::corpus::{load_parallel_corpus, read_sentences, AlignedSentencePair, Side};
use crate::decoder::{
    trace_line, Decoder, DecoderConfig, DecoderWeights, DEFAULT_BEAM, DEFAULT_DISTORTION_LIMIT,
};
use crate::eval::{
    bleu, cache_equivalence_report, intrinsic_accuracy, tokenize_lines, write_summary,
};
use crate::examples::{generate_corpus_examples, shard_records, write_examples};
use crate::features::{FeatureConfig, DEFAULT_HASH_BITS};
use crate::lm::{train_lm_with_backoff, NGramModel, DEFAULT_BACKOFF, DEFAULT_ORDER};
use crate::phrases::{build_phrase_table, PhraseTable, DEFAULT_MAX_PHRASE_LEN};
use crate::synthetic::{agreement_corpus, pair_lines, sense_corpus, toy_corpus};

#[derive(Debug, Parser)]
#[command(
    name = "ctxmt",
    version,
    about = "Phrase-based translation with a context-aware phrase classifier"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a phrase table from an aligned corpus.
    ExtractPhrases(ExtractPhrasesArgs),
    /// Train an n-gram language model on factored target text.
    TrainLm(TrainLmArgs),
    /// Write classifier training examples.
    ExtractExamples(ExtractExamplesArgs),
    /// Train the phrase classifier.
    Train(TrainArgs),
    /// Translate a factored source file.
    Decode(DecodeArgs),
    /// Corpus BLEU of a hypothesis file against a reference file.
    Bleu(BleuArgs),
    /// Phrase classification accuracy on an aligned test corpus.
    IntrinsicEval(IntrinsicArgs),
    /// Compare decoding with and without classifier caches.
    CacheReport(CacheReportArgs),
    /// Write a synthetic aligned corpus.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    #[arg(long)]
    pub align: PathBuf,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Seed for every random choice.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct ExtractPhrasesArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_PHRASE_LEN)]
    pub max_len: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct TrainLmArgs {
    /// Factored target-side file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    #[arg(long, default_value_t = DEFAULT_BACKOFF)]
    pub backoff: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ExtractExamplesArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub table: PathBuf,
    /// Feature template file; the full template set if omitted.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_PHRASE_LEN)]
    pub max_len: usize,
    /// Write this many shuffled shards as OUT.0, OUT.1, ...
    #[arg(long)]
    pub shards: Option<usize>,
    #[arg(long)]
    pub no_leave_one_out: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Example files; several files are trained as separate shards.
    #[arg(long, required = true, num_args = 1..)]
    pub examples: Vec<PathBuf>,
    #[arg(long)]
    pub heldout: PathBuf,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Split a single example file into this many shards.
    #[arg(long, default_value_t = 1)]
    pub shards: usize,
    #[arg(long, default_value_t = crate::classifier::DEFAULT_PASSES)]
    pub passes: usize,
    #[arg(long, default_value_t = crate::classifier::DEFAULT_ETA0)]
    pub eta0: f64,
    #[arg(long, default_value_t = DEFAULT_HASH_BITS)]
    pub bits: u32,
    #[arg(long, default_value_t = 0.0)]
    pub l2: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub lm: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// `name<TAB>weight` file; built-in defaults if omitted.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BEAM)]
    pub beam: usize,
    /// Distortion limit; a negative value means unlimited.
    #[arg(long, default_value_t = DEFAULT_DISTORTION_LIMIT as i64, allow_negative_numbers = true)]
    pub distortion: i64,
    #[arg(long, default_value_t = DEFAULT_MAX_PHRASE_LEN)]
    pub max_len: usize,
    /// Fail on unknown words instead of copying them.
    #[arg(long)]
    pub no_oov: bool,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Factored source file.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub models: ModelArgs,
    /// Output file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Disable the classifier caches.
    #[arg(long)]
    pub naive: bool,
    /// Per-sentence feature scores and cache counters.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct BleuArgs {
    #[arg(long)]
    pub hyp: PathBuf,
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IntrinsicArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_PHRASE_LEN)]
    pub max_len: usize,
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CacheReportArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub models: ModelArgs,
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CorpusKind {
    Sense,
    Agreement,
    Toy,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: CorpusKind,
    #[arg(long)]
    pub sentences: usize,
    /// Writes PREFIX.src, PREFIX.tgt and PREFIX.align.
    #[arg(long)]
    pub prefix: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Moves `--config FILE` out of `args` and splices the file's options in
/// right after the subcommand name.
pub fn expand_config(args: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        match arg.to_str() {
            Some("--config") => {
                config = Some(PathBuf::from(it.next().context("--config needs a file")?));
            }
            Some(s) if s.starts_with("--config=") => {
                config = Some(PathBuf::from(&s["--config=".len()..]))
            }
            _ => rest.push(arg),
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut injected = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), i + 1);
        };
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        match value {
            "true" => injected.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => {
                injected.push(OsString::from(format!("--{key}")));
                injected.push(OsString::from(value));
            }
        }
    }
    // program name, then the subcommand
    let at = rest.len().min(2);
    rest.splice(at..at, injected);
    Ok(rest)
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = match expand_config(args.into_iter().map(Into::into).collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn features(path: Option<&Path>) -> anyhow::Result<FeatureConfig> {
    Ok(match path {
        Some(p) => FeatureConfig::read(p)?,
        None => FeatureConfig::full(),
    })
}

fn corpus(args: &CorpusArgs) -> anyhow::Result<Vec<AlignedSentencePair>> {
    Ok(load_parallel_corpus(&args.src, &args.tgt, &args.align)?
        .collect::<crate::Result<Vec<_>>>()?)
}

fn thread_pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()?)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

struct Loaded {
    table: PhraseTable,
    lm: NGramModel,
    model: LinearModel,
    features: FeatureConfig,
    weights: DecoderWeights,
}

impl ModelArgs {
    fn load(&self) -> anyhow::Result<Loaded> {
        Ok(Loaded {
            table: PhraseTable::read(&self.table)?,
            lm: NGramModel::read(&self.lm)?,
            model: LinearModel::read(&self.model)?,
            features: features(self.features.as_deref())?,
            weights: match &self.weights {
                Some(p) => DecoderWeights::read(p)?,
                None => DecoderWeights::default(),
            },
        })
    }

    fn config(&self, naive: bool) -> DecoderConfig {
        DecoderConfig {
            beam: self.beam,
            distortion_limit: usize::try_from(self.distortion).ok(),
            naive,
            allow_oov: !self.no_oov,
            max_phrase_len: self.max_len,
        }
    }
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::ExtractPhrases(a) => {
            let pairs = corpus(&a.corpus)?;
            let table =
                thread_pool(a.common.jobs)?.install(|| build_phrase_table(&pairs, a.max_len))?;
            table.write(&a.out)?;
            eprintln!(
                "{} source phrases, {} options",
                table.num_sources(),
                table.num_options()
            );
        }
        Command::TrainLm(a) => {
            let sentences = read_sentences(&a.input, Side::Target)?;
            train_lm_with_backoff(&sentences, a.order, a.backoff)?.write(&a.out)?;
        }
        Command::ExtractExamples(a) => {
            let pairs = corpus(&a.corpus)?;
            let table = PhraseTable::read(&a.table)?;
            let config = features(a.features.as_deref())?;
            let (records, stats) = thread_pool(a.common.jobs)?.install(|| {
                generate_corpus_examples(&pairs, &table, &config, a.max_len, !a.no_leave_one_out)
            });
            match a.shards {
                None => {
                    write_examples(&records, &a.out)?;
                }
                Some(0) => bail!("--shards must be positive"),
                Some(k) => {
                    for (i, shard) in shard_records(records, k, a.common.seed).iter().enumerate() {
                        let mut name = a.out.clone().into_os_string();
                        name.push(format!(".{i}"));
                        write_examples(shard, PathBuf::from(name))?;
                    }
                }
            }
            eprintln!(
                "{} examples; skipped: {} without candidates, {} without gold, {} gold not in table, {} by leave-one-out",
                stats.emitted, stats.no_candidates, stats.no_gold, stats.gold_not_in_candidates, stats.leave_one_out_skipped
            );
        }
        Command::Train(a) => {
            let config = features(a.features.as_deref())?;
            let cfg = TrainConfig {
                passes: a.passes,
                eta0: a.eta0,
                shards: a.shards,
                seed: a.common.seed,
                l2: a.l2,
                hash_bits: a.bits,
            };
            let hash = |records: Vec<ExampleRecord>| {
                records.iter().map(|r| r.hashed(a.bits)).collect::<Vec<_>>()
            };
            let heldout = hash(read_example_records(&a.heldout)?);
            let fingerprint = config.fingerprint();
            let (model, report) = if a.examples.len() > 1 {
                let shards = a
                    .examples
                    .iter()
                    .map(|p| Ok(hash(read_example_records(p)?)))
                    .collect::<anyhow::Result<Vec<_>>>()?;
                train_sharded(&shards, &heldout, &cfg, &fingerprint)?
            } else {
                let records = read_example_records(&a.examples[0])?;
                if a.shards > 1 {
                    let shards: Vec<_> = shard_records(records, a.shards, a.common.seed)
                        .into_iter()
                        .map(hash)
                        .collect();
                    train_sharded(&shards, &heldout, &cfg, &fingerprint)?
                } else if a.shards == 1 {
                    train(&hash(records), &heldout, &cfg, &fingerprint)?
                } else {
                    bail!("--shards must be positive");
                }
            };
            model.write(&a.out)?;
            for (i, acc) in report.heldout_accuracy.iter().enumerate() {
                eprintln!("pass {}: held-out accuracy {acc:.4}", i + 1);
            }
            eprintln!("kept pass {}", report.best_pass);
        }
        Command::Decode(a) => {
            let m = a.models.load()?;
            let decoder = Decoder::new(
                &m.table,
                &m.lm,
                &m.model,
                &m.features,
                m.weights,
                a.models.config(a.naive),
            )?;
            let sentences = read_sentences(&a.input, Side::Source)?;
            let translations = decoder.decode_all(&sentences, a.common.jobs)?;
            let mut out: Box<dyn Write> = match &a.out {
                Some(p) => Box::new(create(p)?),
                None => Box::new(BufWriter::new(io::stdout().lock())),
            };
            for t in &translations {
                writeln!(out, "{}", t.text())?;
            }
            out.flush()?;
            if let Some(p) = &a.trace {
                let mut w = create(p)?;
                for (i, t) in translations.iter().enumerate() {
                    writeln!(w, "{}", trace_line(i, t))?;
                }
                w.flush()?;
            }
        }
        Command::Bleu(a) => {
            let read = |p: &Path| {
                fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
            };
            let score = bleu(
                &tokenize_lines(&read(&a.hyp)?),
                &tokenize_lines(&read(&a.reference)?),
            )?;
            println!("BLEU = {:.4}", score * 100.0);
            if let Some(p) = &a.summary {
                write_summary(p, &[("bleu".into(), score.to_string())])?;
            }
        }
        Command::IntrinsicEval(a) => {
            let pairs = corpus(&a.corpus)?;
            let table = PhraseTable::read(&a.table)?;
            let model = LinearModel::read(&a.model)?;
            let config = features(a.features.as_deref())?;
            let report = thread_pool(a.common.jobs)?
                .install(|| intrinsic_accuracy(&pairs, &table, &model, &config, a.max_len))?;
            println!("instances\t{}", report.instances);
            println!("model_accuracy\t{:.4}", report.model_accuracy);
            println!("baseline_accuracy\t{:.4}", report.baseline_accuracy);
            if let Some(p) = &a.summary {
                write_summary(
                    p,
                    &[
                        ("instances".into(), report.instances.to_string()),
                        ("model_accuracy".into(), report.model_accuracy.to_string()),
                        (
                            "baseline_accuracy".into(),
                            report.baseline_accuracy.to_string(),
                        ),
                    ],
                )?;
            }
        }
        Command::CacheReport(a) => {
            let m = a.models.load()?;
            let decoder = Decoder::new(
                &m.table,
                &m.lm,
                &m.model,
                &m.features,
                m.weights,
                a.models.config(false),
            )?;
            let sentences = read_sentences(&a.input, Side::Source)?;
            let report = cache_equivalence_report(&decoder, &sentences)?;
            for line in report.lines() {
                println!("{line}");
            }
            let summary = report.summary();
            for (k, v) in &summary {
                println!("{k}\t{v}");
            }
            if let Some(p) = &a.summary {
                write_summary(p, &summary)?;
            }
        }
        Command::Generate(a) => {
            let pairs = match a.kind {
                CorpusKind::Sense => sense_corpus(a.sentences, a.common.seed),
                CorpusKind::Agreement => agreement_corpus(a.sentences),
                CorpusKind::Toy => toy_corpus(a.sentences, a.common.seed),
            };
            let path = |ext: &str| {
                let mut p = a.prefix.clone().into_os_string();
                p.push(format!(".{ext}"));
                PathBuf::from(p)
            };
            let (mut s, mut t, mut l) = (
                create(&path("src"))?,
                create(&path("tgt"))?,
                create(&path("align"))?,
            );
            for pair in &pairs {
                let (src, tgt, align) = pair_lines(pair);
                writeln!(s, "{src}")?;
                writeln!(t, "{tgt}")?;
                writeln!(l, "{align}")?;
            }
            s.flush()?;
            t.flush()?;
            l.flush()?;
        }
    }
    Ok(())
}
