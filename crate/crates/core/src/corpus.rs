//! Factored sentences, word alignments and line-aligned parallel corpora.
//!
//! A factored token is written as `form|lemma|tag` on the target side and
//! `form|lemma|tag|afun|parent_lemma` on the source side. A missing analytical
//! function or parent lemma is written as `-`.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Lines};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const FACTOR_SEPARATOR: char = '|';
pub const SENTENCE_START: &str = "<s>";
pub const SENTENCE_END: &str = "</s>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Source,
    Target,
}

impl Side {
    pub fn arity(self) -> usize {
        match self {
            Side::Source => 5,
            Side::Target => 3,
        }
    }
}

/// One annotation layer of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    Form,
    Lemma,
    Tag,
    /// Analytical function (source side only).
    Afun,
    /// Lemma of the dependency parent (source side only).
    Parent,
}

impl Factor {
    pub fn from_letter(c: char) -> Option<Factor> {
        match c {
            'f' => Some(Factor::Form),
            'l' => Some(Factor::Lemma),
            't' => Some(Factor::Tag),
            'a' => Some(Factor::Afun),
            'p' => Some(Factor::Parent),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Factor::Form => 'f',
            Factor::Lemma => 'l',
            Factor::Tag => 't',
            Factor::Afun => 'a',
            Factor::Parent => 'p',
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn available_on(self, side: Side) -> bool {
        self.index() < side.arity()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactoredWord {
    factors: Vec<String>,
}

impl FactoredWord {
    pub fn new<S: Into<String>>(side: Side, factors: impl IntoIterator<Item = S>) -> Result<Self> {
        let factors: Vec<String> = factors.into_iter().map(Into::into).collect();
        if factors.len() != side.arity() {
            return Err(Error::format(format!(
                "expected {} factors, got {}",
                side.arity(),
                factors.len()
            )));
        }
        for f in &factors {
            if f.is_empty() {
                return Err(Error::format("empty factor"));
            }
            if f.contains(FACTOR_SEPARATOR) || f.chars().any(char::is_whitespace) {
                return Err(Error::format(format!("invalid character in factor {f:?}")));
            }
        }
        Ok(FactoredWord { factors })
    }

    /// A word whose every factor is `token`; used for `<s>`/`</s>` padding.
    pub fn padding(side: Side, token: &str) -> Self {
        FactoredWord {
            factors: vec![token.to_string(); side.arity()],
        }
    }

    pub fn factors(&self) -> &[String] {
        &self.factors
    }

    pub fn side(&self) -> Side {
        if self.factors.len() == Side::Source.arity() {
            Side::Source
        } else {
            Side::Target
        }
    }

    pub fn factor(&self, factor: Factor) -> Option<&str> {
        self.factors.get(factor.index()).map(String::as_str)
    }

    pub fn form(&self) -> &str {
        &self.factors[0]
    }

    pub fn lemma(&self) -> &str {
        &self.factors[1]
    }

    pub fn tag(&self) -> &str {
        &self.factors[2]
    }

    pub fn is_padding(&self) -> bool {
        self.form() == SENTENCE_START || self.form() == SENTENCE_END
    }
}

impl fmt::Display for FactoredWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            f.write_str(factor)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    words: Vec<FactoredWord>,
    side: Side,
}

impl Sentence {
    pub fn new(side: Side, words: Vec<FactoredWord>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::EmptySentence);
        }
        if let Some(i) = words.iter().position(|w| w.factors.len() != side.arity()) {
            return Err(Error::format(format!(
                "expected {} factors, got {} at token {i}",
                side.arity(),
                words[i].factors.len()
            )));
        }
        Ok(Sentence { words, side })
    }

    pub fn words(&self) -> &[FactoredWord] {
        &self.words
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(FactoredWord::form)
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.words.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

pub fn parse_factored_sentence(line: &str, side: Side) -> Result<Sentence> {
    let mut words = Vec::new();
    for (i, token) in line.split_whitespace().enumerate() {
        let factors: Vec<&str> = token.split(FACTOR_SEPARATOR).collect();
        if factors.len() != side.arity() {
            return Err(Error::format(format!(
                "expected {} factors, got {} at token {i}",
                side.arity(),
                factors.len()
            )));
        }
        let word = FactoredWord::new(side, factors)
            .map_err(|e| Error::format(format!("{e} at token {i}")))?;
        words.push(word);
    }
    Sentence::new(side, words)
}

/// Source-target links, 0-based, kept sorted and free of duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AlignmentSet {
    links: BTreeSet<(usize, usize)>,
}

impl AlignmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_links(links: impl IntoIterator<Item = (usize, usize)>) -> Self {
        AlignmentSet {
            links: links.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, src: usize, tgt: usize) -> bool {
        self.links.insert((src, tgt))
    }

    pub fn contains(&self, src: usize, tgt: usize) -> bool {
        self.links.contains(&(src, tgt))
    }

    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Source positions linked to target position `tgt`, ascending.
    pub fn sources_of(&self, tgt: usize) -> Vec<usize> {
        self.links
            .iter()
            .filter(|&&(_, t)| t == tgt)
            .map(|&(s, _)| s)
            .collect()
    }
}

impl fmt::Display for AlignmentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, t)) in self.links.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}-{t}")?;
        }
        Ok(())
    }
}

pub fn parse_alignment(line: &str, src_len: usize, tgt_len: usize) -> Result<AlignmentSet> {
    let mut set = AlignmentSet::new();
    for pair in line.split_whitespace() {
        let (s, t) = pair
            .split_once('-')
            .ok_or_else(|| Error::format(format!("malformed alignment pair {pair:?}")))?;
        let s: usize = s
            .parse()
            .map_err(|_| Error::format(format!("malformed alignment pair {pair:?}")))?;
        let t: usize = t
            .parse()
            .map_err(|_| Error::format(format!("malformed alignment pair {pair:?}")))?;
        if s >= src_len || t >= tgt_len {
            return Err(Error::Bounds(format!(
                "link {s}-{t} outside a {src_len}x{tgt_len} sentence pair"
            )));
        }
        set.insert(s, t);
    }
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedSentencePair {
    pub source: Sentence,
    pub target: Sentence,
    pub alignment: AlignmentSet,
}

impl AlignedSentencePair {
    pub fn new(source: Sentence, target: Sentence, alignment: AlignmentSet) -> Result<Self> {
        if source.side() != Side::Source || target.side() != Side::Target {
            return Err(Error::format("sentence pair sides are swapped"));
        }
        if let Some((s, t)) = alignment
            .links()
            .find(|&(s, t)| s >= source.len() || t >= target.len())
        {
            return Err(Error::Bounds(format!(
                "link {s}-{t} outside a {}x{} sentence pair",
                source.len(),
                target.len()
            )));
        }
        Ok(AlignedSentencePair {
            source,
            target,
            alignment,
        })
    }

    /// Builds a pair from the three textual lines of a corpus.
    pub fn parse(src: &str, tgt: &str, align: &str) -> Result<Self> {
        let source = parse_factored_sentence(src, Side::Source)?;
        let target = parse_factored_sentence(tgt, Side::Target)?;
        let alignment = parse_alignment(align, source.len(), target.len())?;
        Ok(AlignedSentencePair {
            source,
            target,
            alignment,
        })
    }
}

fn open(path: &Path) -> Result<Lines<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file).lines())
}

/// Streams [`AlignedSentencePair`]s from three line-aligned files.
pub struct ParallelCorpusReader {
    paths: [PathBuf; 3],
    readers: [Lines<BufReader<File>>; 3],
    line: usize,
    done: bool,
}

impl ParallelCorpusReader {
    fn next_line(&mut self, which: usize) -> Result<Option<String>> {
        match self.readers[which].next() {
            None => Ok(None),
            Some(Ok(l)) => Ok(Some(l)),
            Some(Err(e)) => Err(Error::io(&self.paths[which], e)),
        }
    }

    fn read_pair(&mut self) -> Result<Option<AlignedSentencePair>> {
        self.line += 1;
        let src = self.next_line(0)?;
        let tgt = self.next_line(1)?;
        let align = self.next_line(2)?;
        match (src, tgt, align) {
            (None, None, None) => Ok(None),
            (Some(s), Some(t), Some(a)) => AlignedSentencePair::parse(&s, &t, &a)
                .map(Some)
                .map_err(|e| Error::format(format!("line {}: {e}", self.line))),
            _ => Err(Error::LineCountMismatch { line: self.line }),
        }
    }
}

impl Iterator for ParallelCorpusReader {
    type Item = Result<AlignedSentencePair>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_pair() {
            Ok(Some(pair)) => Some(Ok(pair)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

pub fn load_parallel_corpus(
    src_path: impl AsRef<Path>,
    tgt_path: impl AsRef<Path>,
    align_path: impl AsRef<Path>,
) -> Result<ParallelCorpusReader> {
    let paths = [
        src_path.as_ref().to_path_buf(),
        tgt_path.as_ref().to_path_buf(),
        align_path.as_ref().to_path_buf(),
    ];
    let readers = [open(&paths[0])?, open(&paths[1])?, open(&paths[2])?];
    Ok(ParallelCorpusReader {
        paths,
        readers,
        line: 0,
        done: false,
    })
}

/// Reads a whole factored file of one side.
pub fn read_sentences(path: impl AsRef<Path>, side: Side) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (i, line) in open(path)?.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let sentence = parse_factored_sentence(&line, side)
            .map_err(|e| Error::format(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(sentence);
    }
    Ok(out)
}
