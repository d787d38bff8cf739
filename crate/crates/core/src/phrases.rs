//! Phrase-pair extraction and the phrase table.
//!
//! Source phrases are keyed by their surface forms; target phrases keep all
//! three target factors so the decoder can emit lemmas and tags alongside
//! forms.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::{AlignedSentencePair, AlignmentSet, FactoredWord, Side};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_PHRASE_LEN: usize = 7;

/// Inclusive token range `(start, end)`.
pub type Span = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhrasePairInstance {
    pub source_span: Span,
    pub target_span: Span,
    /// Links relative to the span starts.
    pub internal_alignment: AlignmentSet,
}

/// Every alignment-consistent phrase pair of `pair` with both sides at most
/// `max_len` tokens and at least one link inside. Unaligned target words at
/// the boundaries are attached in all possible ways.
pub fn extract_phrase_pairs(pair: &AlignedSentencePair, max_len: usize) -> Vec<PhrasePairInstance> {
    let src_len = pair.source.len();
    let tgt_len = pair.target.len();
    let links: Vec<(usize, usize)> = pair.alignment.links().collect();
    let mut tgt_aligned = vec![false; tgt_len];
    for &(_, t) in &links {
        tgt_aligned[t] = true;
    }

    let mut out = Vec::new();
    for s_start in 0..src_len {
        for s_end in s_start..src_len.min(s_start + max_len) {
            let mut t_min = usize::MAX;
            let mut t_max = 0;
            for &(s, t) in &links {
                if (s_start..=s_end).contains(&s) {
                    t_min = t_min.min(t);
                    t_max = t_max.max(t);
                }
            }
            if t_min == usize::MAX || t_max - t_min + 1 > max_len {
                continue;
            }
            let consistent = links
                .iter()
                .all(|&(s, t)| !(t_min..=t_max).contains(&t) || (s_start..=s_end).contains(&s));
            if !consistent {
                continue;
            }

            let mut t_start = t_min;
            loop {
                let mut t_end = t_max;
                while t_end - t_start < max_len {
                    let internal = AlignmentSet::from_links(
                        links
                            .iter()
                            .filter(|&&(s, _)| (s_start..=s_end).contains(&s))
                            .map(|&(s, t)| (s - s_start, t - t_start)),
                    );
                    out.push(PhrasePairInstance {
                        source_span: (s_start, s_end),
                        target_span: (t_start, t_end),
                        internal_alignment: internal,
                    });
                    t_end += 1;
                    if t_end >= tgt_len || tgt_aligned[t_end] {
                        break;
                    }
                }
                if t_start == 0 || tgt_aligned[t_start - 1] || t_max + 1 - (t_start - 1) > max_len {
                    break;
                }
                t_start -= 1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationOption {
    /// Surface forms of the source phrase.
    pub source_phrase: Vec<String>,
    pub target_phrase: Vec<FactoredWord>,
    pub internal_alignment: AlignmentSet,
    pub logp_tgt_given_src: f64,
    pub logp_src_given_tgt: f64,
    pub pair_count: u64,
}

impl TranslationOption {
    pub fn source_key(&self) -> String {
        self.source_phrase.join(" ")
    }

    pub fn target_key(&self) -> String {
        target_key(&self.target_phrase)
    }

    pub fn target_forms(&self) -> String {
        self.target_phrase
            .iter()
            .map(FactoredWord::form)
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Copies an unknown source word through as its own translation.
    pub fn copy_through(word: &FactoredWord) -> TranslationOption {
        let target = FactoredWord::new(Side::Target, [word.form(), word.lemma(), word.tag()])
            .unwrap_or_else(|_| FactoredWord::padding(Side::Target, word.form()));
        TranslationOption {
            source_phrase: vec![word.form().to_string()],
            target_phrase: vec![target],
            internal_alignment: AlignmentSet::new(),
            logp_tgt_given_src: 0.0,
            logp_src_given_tgt: 0.0,
            pair_count: 1,
        }
    }
}

pub fn source_key<S: AsRef<str>>(forms: &[S]) -> String {
    forms
        .iter()
        .map(AsRef::as_ref)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn target_key(words: &[FactoredWord]) -> String {
    words
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Default)]
struct PairStats {
    target: Vec<FactoredWord>,
    count: u64,
    alignments: HashMap<AlignmentSet, u64>,
}

/// Accumulates phrase-pair counts; partial builders can be merged.
#[derive(Debug, Default)]
pub struct PhraseTableBuilder {
    max_len: usize,
    pairs: HashMap<(String, String), PairStats>,
}

impl PhraseTableBuilder {
    pub fn new(max_len: usize) -> Self {
        PhraseTableBuilder {
            max_len,
            pairs: HashMap::new(),
        }
    }

    pub fn add(&mut self, pair: &AlignedSentencePair) {
        for inst in extract_phrase_pairs(pair, self.max_len) {
            let src: Vec<&str> = pair.source.words()[inst.source_span.0..=inst.source_span.1]
                .iter()
                .map(FactoredWord::form)
                .collect();
            let tgt = &pair.target.words()[inst.target_span.0..=inst.target_span.1];
            let stats = self
                .pairs
                .entry((source_key(&src), target_key(tgt)))
                .or_insert_with(|| PairStats {
                    target: tgt.to_vec(),
                    ..PairStats::default()
                });
            stats.count += 1;
            *stats.alignments.entry(inst.internal_alignment).or_insert(0) += 1;
        }
    }

    pub fn merge(&mut self, other: PhraseTableBuilder) {
        for (key, stats) in other.pairs {
            let mine = self.pairs.entry(key).or_insert_with(|| PairStats {
                target: stats.target.clone(),
                ..PairStats::default()
            });
            mine.count += stats.count;
            for (a, c) in stats.alignments {
                *mine.alignments.entry(a).or_insert(0) += c;
            }
        }
    }

    pub fn finish(self) -> Result<PhraseTable> {
        if self.pairs.is_empty() {
            return Err(Error::Empty("no phrase pairs extracted"));
        }
        let mut source_counts: HashMap<String, u64> = HashMap::new();
        let mut target_counts: HashMap<String, u64> = HashMap::new();
        for ((src, tgt), stats) in &self.pairs {
            *source_counts.entry(src.clone()).or_insert(0) += stats.count;
            *target_counts.entry(tgt.clone()).or_insert(0) += stats.count;
        }
        let mut entries: HashMap<String, Vec<TranslationOption>> = HashMap::new();
        for ((src, tgt), stats) in self.pairs {
            // Most frequent internal alignment; ties go to the smallest link set.
            let alignment = stats
                .alignments
                .into_iter()
                .min_by(|(a1, c1), (a2, c2)| c2.cmp(c1).then_with(|| a1.cmp(a2)))
                .map(|(a, _)| a)
                .unwrap_or_default();
            let src_count = source_counts[&src];
            let tgt_count = target_counts[&tgt];
            let option = TranslationOption {
                source_phrase: src.split(' ').map(str::to_string).collect(),
                target_phrase: stats.target,
                internal_alignment: alignment,
                logp_tgt_given_src: (stats.count as f64 / src_count as f64).ln(),
                logp_src_given_tgt: (stats.count as f64 / tgt_count as f64).ln(),
                pair_count: stats.count,
            };
            entries.entry(src).or_default().push(option);
        }
        for options in entries.values_mut() {
            sort_candidates(options);
        }
        Ok(PhraseTable {
            entries,
            source_counts,
            target_counts,
        })
    }
}

fn sort_candidates(options: &mut [TranslationOption]) {
    options.sort_by(|a, b| {
        b.pair_count
            .cmp(&a.pair_count)
            .then_with(|| a.target_forms().cmp(&b.target_forms()))
            .then_with(|| a.target_key().cmp(&b.target_key()))
    });
}

#[derive(Debug, Clone, Default)]
pub struct PhraseTable {
    entries: HashMap<String, Vec<TranslationOption>>,
    source_counts: HashMap<String, u64>,
    target_counts: HashMap<String, u64>,
}

pub fn build_phrase_table<I, P>(corpus: I, max_len: usize) -> Result<PhraseTable>
where
    I: IntoIterator<Item = P>,
    P: Borrow<AlignedSentencePair>,
{
    let mut builder = PhraseTableBuilder::new(max_len);
    let mut seen = 0usize;
    for pair in corpus {
        builder.add(pair.borrow());
        seen += 1;
    }
    if seen == 0 {
        return Err(Error::Empty("empty corpus"));
    }
    builder.finish()
}

impl PhraseTable {
    /// Candidates for the exact source form sequence, most frequent first,
    /// ties broken by target form string.
    pub fn lookup<S: AsRef<str>>(&self, source_forms: &[S]) -> &[TranslationOption] {
        self.lookup_key(&source_key(source_forms))
    }

    pub fn lookup_key(&self, key: &str) -> &[TranslationOption] {
        self.entries.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn source_count(&self, key: &str) -> u64 {
        self.source_counts.get(key).copied().unwrap_or(0)
    }

    pub fn target_count(&self, key: &str) -> u64 {
        self.target_counts.get(key).copied().unwrap_or(0)
    }

    pub fn num_sources(&self) -> usize {
        self.entries.len()
    }

    pub fn num_options(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    /// Source keys in sorted order.
    pub fn source_keys(&self) -> Vec<&str> {
        let mut keys: Vec<&str> = self.entries.keys().map(String::as_str).collect();
        keys.sort_unstable();
        keys
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for key in self.source_keys() {
            for opt in &self.entries[key] {
                let factor_line = |i: usize| {
                    opt.target_phrase
                        .iter()
                        .map(|w| w.factors()[i].as_str())
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                let tkey = opt.target_key();
                writeln!(
                    w,
                    "{} ||| {} ||| {} ||| {} ||| {} {} ||| {} ||| {} {} {}",
                    key,
                    factor_line(0),
                    factor_line(1),
                    factor_line(2),
                    opt.logp_tgt_given_src,
                    opt.logp_src_given_tgt,
                    opt.internal_alignment,
                    opt.pair_count,
                    self.source_count(key),
                    self.target_count(&tkey),
                )?;
            }
        }
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<PhraseTable> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut table = PhraseTable::default();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            table
                .parse_line(&line)
                .map_err(|e| Error::format(format!("{}:{}: {e}", path.display(), i + 1)))?;
        }
        if table.entries.is_empty() {
            return Err(Error::Empty("phrase table file has no entries"));
        }
        for options in table.entries.values_mut() {
            sort_candidates(options);
        }
        Ok(table)
    }

    fn parse_line(&mut self, line: &str) -> Result<()> {
        let fields: Vec<&str> = line.split("|||").map(str::trim).collect();
        if fields.len() != 7 {
            return Err(Error::format(format!(
                "expected 7 fields, got {}",
                fields.len()
            )));
        }
        let source_phrase: Vec<String> = fields[0].split_whitespace().map(str::to_string).collect();
        let forms: Vec<&str> = fields[1].split_whitespace().collect();
        let lemmas: Vec<&str> = fields[2].split_whitespace().collect();
        let tags: Vec<&str> = fields[3].split_whitespace().collect();
        if source_phrase.is_empty() || forms.is_empty() {
            return Err(Error::format("empty phrase"));
        }
        if forms.len() != lemmas.len() || forms.len() != tags.len() {
            return Err(Error::format("target factor lines differ in length"));
        }
        let target_phrase = forms
            .iter()
            .zip(&lemmas)
            .zip(&tags)
            .map(|((f, l), t)| FactoredWord::new(Side::Target, [*f, *l, *t]))
            .collect::<Result<Vec<_>>>()?;
        let probs = parse_numbers::<f64>(fields[4], 2, "log-probabilities")?;
        if probs.iter().any(|p| p.is_nan() || *p > 0.0) {
            return Err(Error::format("log-probabilities must be <= 0"));
        }
        let internal_alignment =
            crate::corpus::parse_alignment(fields[5], source_phrase.len(), target_phrase.len())?;
        let counts = parse_numbers::<u64>(fields[6], 3, "counts")?;
        if counts[0] == 0 || counts[0] > counts[1].min(counts[2]) {
            return Err(Error::format("inconsistent counts"));
        }
        let option = TranslationOption {
            source_phrase,
            target_phrase,
            internal_alignment,
            logp_tgt_given_src: probs[0],
            logp_src_given_tgt: probs[1],
            pair_count: counts[0],
        };
        let skey = option.source_key();
        self.source_counts.insert(skey.clone(), counts[1]);
        self.target_counts.insert(option.target_key(), counts[2]);
        self.entries.entry(skey).or_default().push(option);
        Ok(())
    }
}

fn parse_numbers<T: std::str::FromStr>(field: &str, n: usize, what: &str) -> Result<Vec<T>> {
    let values = field
        .split_whitespace()
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::format(format!("bad {what}: {v:?}")))
        })
        .collect::<Result<Vec<T>>>()?;
    if values.len() != n {
        return Err(Error::format(format!("expected {n} {what}")));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AlignedSentencePair;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn toy(src: &str, tgt: &str, align: &str) -> AlignedSentencePair {
        let s = src
            .split_whitespace()
            .map(|w| format!("{w}|{w}|X|-|-"))
            .collect::<Vec<_>>()
            .join(" ");
        let t = tgt
            .split_whitespace()
            .map(|w| format!("{w}|{w}|Y"))
            .collect::<Vec<_>>()
            .join(" ");
        AlignedSentencePair::parse(&s, &t, align).unwrap()
    }

    /// Exhaustive enumeration of all (source span, target span) boxes that
    /// contain a link and that no link leaves.
    fn brute_force(pair: &AlignedSentencePair, max_len: usize) -> BTreeSet<(Span, Span)> {
        let links: Vec<_> = pair.alignment.links().collect();
        let mut out = BTreeSet::new();
        for s1 in 0..pair.source.len() {
            for s2 in s1..pair.source.len() {
                for t1 in 0..pair.target.len() {
                    for t2 in t1..pair.target.len() {
                        if s2 - s1 + 1 > max_len || t2 - t1 + 1 > max_len {
                            continue;
                        }
                        let in_s = |s: usize| s1 <= s && s <= s2;
                        let in_t = |t: usize| t1 <= t && t <= t2;
                        let any_inside = links.iter().any(|&(s, t)| in_s(s) && in_t(t));
                        let leaving = links.iter().any(|&(s, t)| in_s(s) != in_t(t));
                        if any_inside && !leaving {
                            out.insert(((s1, s2), (t1, t2)));
                        }
                    }
                }
            }
        }
        out
    }

    fn spans_as_words(pair: &AlignedSentencePair, max_len: usize) -> BTreeSet<(String, String)> {
        extract_phrase_pairs(pair, max_len)
            .into_iter()
            .map(|p| {
                let s: Vec<_> = pair.source.words()[p.source_span.0..=p.source_span.1]
                    .iter()
                    .map(|w| w.form())
                    .collect();
                let t: Vec<_> = pair.target.words()[p.target_span.0..=p.target_span.1]
                    .iter()
                    .map(|w| w.form())
                    .collect();
                (s.join(" "), t.join(" "))
            })
            .collect()
    }

    fn set(items: &[(&str, &str)]) -> BTreeSet<(String, String)> {
        items
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn monotone_pair() {
        let p = toy("a b", "x y", "0-0 1-1");
        assert_eq!(
            spans_as_words(&p, 2),
            set(&[("a", "x"), ("b", "y"), ("a b", "x y")])
        );
    }

    #[test]
    fn crossing_pair() {
        let p = toy("a b", "x y", "0-1 1-0");
        assert_eq!(
            spans_as_words(&p, 2),
            set(&[("a", "y"), ("b", "x"), ("a b", "x y")])
        );
    }

    #[test]
    fn unaligned_source_word_attaches() {
        let p = toy("a b", "x", "0-0");
        assert_eq!(spans_as_words(&p, 2), set(&[("a", "x"), ("a b", "x")]));
    }

    #[test]
    fn unaligned_target_words_extend() {
        let p = toy("a", "u x v", "0-1");
        assert_eq!(
            spans_as_words(&p, 3),
            set(&[("a", "x"), ("a", "u x"), ("a", "x v"), ("a", "u x v")])
        );
        assert_eq!(
            spans_as_words(&p, 2),
            set(&[("a", "x"), ("a", "u x"), ("a", "x v")])
        );
    }

    #[test]
    fn internal_alignment_is_relative() {
        let p = toy("a b c", "x y z", "1-2 2-1");
        let inst = extract_phrase_pairs(&p, 3)
            .into_iter()
            .find(|i| i.source_span == (1, 2) && i.target_span == (1, 2))
            .unwrap();
        assert_eq!(
            inst.internal_alignment.links().collect::<Vec<_>>(),
            vec![(0, 1), (1, 0)]
        );
    }

    #[test]
    fn empty_alignment_extracts_nothing() {
        assert!(extract_phrase_pairs(&toy("a b", "x y", ""), 3).is_empty());
    }

    fn random_pair() -> impl Strategy<Value = AlignedSentencePair> {
        (1usize..=5, 1usize..=5)
            .prop_flat_map(|(n, m)| {
                (
                    Just(n),
                    Just(m),
                    prop::collection::vec(prop::bool::weighted(0.3), n * m),
                )
            })
            .prop_map(|(n, m, bits)| {
                let src: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
                let tgt: Vec<String> = (0..m).map(|i| format!("t{i}")).collect();
                let align: Vec<String> = bits
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| **b)
                    .map(|(k, _)| format!("{}-{}", k / m, k % m))
                    .collect();
                toy(&src.join(" "), &tgt.join(" "), &align.join(" "))
            })
    }

    proptest! {
        #[test]
        fn matches_brute_force(pair in random_pair(), max_len in 1usize..=5) {
            let got: BTreeSet<(Span, Span)> = extract_phrase_pairs(&pair, max_len)
                .into_iter()
                .map(|p| (p.source_span, p.target_span))
                .collect();
            prop_assert_eq!(got, brute_force(&pair, max_len));
        }

        #[test]
        fn probabilities_normalize(pairs in prop::collection::vec(random_pair(), 1..6)) {
            if let Ok(table) = build_phrase_table(&pairs, 3) {
                for key in table.source_keys() {
                    let total: f64 = table.lookup_key(key).iter().map(|o| o.logp_tgt_given_src.exp()).sum();
                    prop_assert!((total - 1.0).abs() < 1e-9);
                    for o in table.lookup_key(key) {
                        prop_assert!(o.pair_count <= table.source_count(key).min(table.target_count(&o.target_key())));
                    }
                }
            }
        }
    }

    #[test]
    fn counts_and_probabilities() {
        let corpus = vec![toy("a", "x", "0-0"), toy("a", "x", "0-0")];
        let table = build_phrase_table(&corpus, 7).unwrap();
        let opts = table.lookup(&["a"]);
        assert_eq!(opts.len(), 1);
        assert_eq!(opts[0].pair_count, 2);
        assert_eq!(opts[0].logp_tgt_given_src, 0.0);

        let corpus = vec![
            toy("a", "x", "0-0"),
            toy("a", "y", "0-0"),
            toy("a", "x", "0-0"),
        ];
        let table = build_phrase_table(&corpus, 7).unwrap();
        let opts = table.lookup(&["a"]);
        assert_eq!(opts[0].target_forms(), "x");
        assert_eq!(opts[0].pair_count, 2);
        assert!((opts[0].logp_tgt_given_src.exp() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(opts[1].target_forms(), "y");
        assert!((opts[1].logp_tgt_given_src.exp() - 1.0 / 3.0).abs() < 1e-12);
        assert!(table.lookup(&["zzz"]).is_empty());
    }

    #[test]
    fn single_occurrence_has_count_one() {
        let table = build_phrase_table(&[toy("q", "r", "0-0")], 7).unwrap();
        assert_eq!(table.lookup(&["q"])[0].pair_count, 1);
    }

    #[test]
    fn lookup_tie_break_by_form() {
        let corpus = vec![toy("a", "m", "0-0"), toy("a", "k", "0-0")];
        let table = build_phrase_table(&corpus, 7).unwrap();
        let forms: Vec<_> = table
            .lookup(&["a"])
            .iter()
            .map(|o| o.target_forms())
            .collect();
        assert_eq!(forms, ["k", "m"]);
    }

    #[test]
    fn most_frequent_internal_alignment_wins() {
        let corpus = vec![
            toy("a b", "x y", "0-0 1-1"),
            toy("a b", "x y", "0-1 1-0"),
            toy("a b", "x y", "0-1 1-0"),
        ];
        let table = build_phrase_table(&corpus, 2).unwrap();
        let opt = &table.lookup(&["a", "b"])[0];
        assert_eq!(opt.pair_count, 3);
        assert_eq!(
            opt.internal_alignment.links().collect::<Vec<_>>(),
            vec![(0, 1), (1, 0)]
        );
        // 1:1 tie resolves to the lexicographically smaller link set
        let table = build_phrase_table(&corpus[..2], 2).unwrap();
        let opt = &table.lookup(&["a", "b"])[0];
        assert_eq!(
            opt.internal_alignment.links().collect::<Vec<_>>(),
            vec![(0, 0), (1, 1)]
        );
    }

    #[test]
    fn empty_corpus_errors() {
        let corpus: Vec<AlignedSentencePair> = vec![];
        assert!(matches!(
            build_phrase_table(&corpus, 7),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn merged_builders_equal_sequential() {
        let corpus = vec![
            toy("a b", "x y", "0-0 1-1"),
            toy("a c", "x z", "0-0 1-1"),
            toy("b", "w", "0-0"),
        ];
        let mut left = PhraseTableBuilder::new(3);
        left.add(&corpus[0]);
        let mut right = PhraseTableBuilder::new(3);
        right.add(&corpus[1]);
        right.add(&corpus[2]);
        left.merge(right);
        let merged = left.finish().unwrap();
        let sequential = build_phrase_table(&corpus, 3).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        merged.write_to(&mut a).unwrap();
        sequential.write_to(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn file_round_trip() {
        let corpus = vec![
            toy("a b", "x y", "0-0 1-1"),
            toy("a", "y", "0-0"),
            toy("a b", "x y", "0-1 1-0"),
        ];
        let table = build_phrase_table(&corpus, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pt");
        table.write(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text
            .lines()
            .any(|l| l.starts_with("b ||| y ||| y ||| Y ||| -0.69")
                && l.ends_with("||| 0-0 ||| 1 2 3")));
        let back = PhraseTable::read(&path).unwrap();
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(text.as_bytes(), &again[..]);
        assert_eq!(back.lookup(&["a"]), table.lookup(&["a"]));
    }
}
