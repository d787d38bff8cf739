//! Stupid-backoff n-gram language model over target surface forms.
//!
//! Counts are collected for every k-gram (k <= order) that ends at a real
//! token of a sentence padded with `order - 1` start symbols and one end
//! symbol. Start symbols are never predicted, so they get no unigram count.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::{Sentence, SENTENCE_END, SENTENCE_START};
use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 5;
pub const DEFAULT_BACKOFF: f64 = 0.4;
pub const UNK_PROBABILITY: f64 = 1e-7;

/// Id given to every out-of-vocabulary word.
pub const UNK: u32 = u32::MAX;
const START_ID: u32 = 0;
const END_ID: u32 = 1;

/// The last `order - 1` target words, as vocabulary ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LMState(Vec<u32>);

impl LMState {
    pub fn words(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn push(&self, word: u32) -> LMState {
        let mut next = self.0.clone();
        if !next.is_empty() {
            next.remove(0);
            next.push(word);
        }
        LMState(next)
    }
}

#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    backoff: f64,
    vocab: HashMap<String, u32>,
    words: Vec<String>,
    counts: HashMap<Vec<u32>, u64>,
    /// Sum of continuation counts of each (k-1)-gram prefix.
    context_counts: HashMap<Vec<u32>, u64>,
    total: u64,
}

impl NGramModel {
    fn empty(order: usize, backoff: f64) -> Self {
        let mut model = NGramModel {
            order,
            backoff,
            vocab: HashMap::new(),
            words: Vec::new(),
            counts: HashMap::new(),
            context_counts: HashMap::new(),
            total: 0,
        };
        model.intern(SENTENCE_START);
        model.intern(SENTENCE_END);
        model
    }

    fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.vocab.get(word) {
            return id;
        }
        let id = self.words.len() as u32;
        self.vocab.insert(word.to_string(), id);
        self.words.push(word.to_string());
        id
    }

    fn add_count(&mut self, gram: Vec<u32>, count: u64) {
        if gram.len() == 1 {
            self.total += count;
        } else {
            *self
                .context_counts
                .entry(gram[..gram.len() - 1].to_vec())
                .or_insert(0) += count;
        }
        *self.counts.entry(gram).or_insert(0) += count;
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn backoff(&self) -> f64 {
        self.backoff
    }

    pub fn word_id(&self, word: &str) -> u32 {
        self.vocab.get(word).copied().unwrap_or(UNK)
    }

    pub fn count(&self, words: &[&str]) -> u64 {
        let ids: Vec<u32> = words.iter().map(|w| self.word_id(w)).collect();
        self.counts.get(&ids).copied().unwrap_or(0)
    }

    pub fn initial_state(&self) -> LMState {
        LMState(vec![START_ID; self.order - 1])
    }

    /// log10 score of `word` after `context` (most recent word last). Only
    /// the last `order - 1` context words are used.
    pub fn score_ids(&self, context: &[u32], word: u32) -> f64 {
        if word == UNK {
            return UNK_PROBABILITY.log10();
        }
        let usable = context.len().min(self.order - 1);
        let context = &context[context.len() - usable..];
        let mut gram: Vec<u32> = Vec::with_capacity(usable + 1);
        let mut penalty = 0.0;
        for k in (2..=usable + 1).rev() {
            gram.clear();
            gram.extend_from_slice(&context[context.len() - (k - 1)..]);
            gram.push(word);
            if let Some(&c) = self.counts.get(gram.as_slice()) {
                let denom = self.context_counts[&gram[..k - 1]];
                return penalty + (c as f64 / denom as f64).log10();
            }
            penalty += self.backoff.log10();
        }
        match self.counts.get([word].as_slice()) {
            Some(&c) => penalty + (c as f64 / self.total as f64).log10(),
            // in vocabulary but never predicted (only `<s>`)
            None => UNK_PROBABILITY.log10(),
        }
    }

    pub fn score(&self, word: &str, state: &LMState) -> (f64, LMState) {
        let id = self.word_id(word);
        (self.score_ids(state.words(), id), state.push(id))
    }

    /// Scores an already interned word and returns the successor state.
    pub fn advance(&self, state: &LMState, word: u32) -> (f64, LMState) {
        (self.score_ids(state.words(), word), state.push(word))
    }

    pub fn score_end(&self, state: &LMState) -> f64 {
        self.score_ids(state.words(), END_ID)
    }

    /// Scores a whole sentence (including the end symbol) directly over its
    /// padded n-gram sequence.
    pub fn score_sentence<S: AsRef<str>>(&self, forms: &[S]) -> f64 {
        let mut seq = vec![START_ID; self.order - 1];
        seq.extend(forms.iter().map(|w| self.word_id(w.as_ref())));
        seq.push(END_ID);
        (self.order - 1..seq.len())
            .map(|i| self.score_ids(&seq[i + 1 - self.order..i], seq[i]))
            .sum()
    }

    /// Context-free estimate of a phrase: each word conditioned only on the
    /// preceding words of the same phrase.
    pub fn estimate_phrase<S: AsRef<str>>(&self, forms: &[S]) -> f64 {
        let ids: Vec<u32> = forms.iter().map(|w| self.word_id(w.as_ref())).collect();
        (0..ids.len())
            .map(|i| self.score_ids(&ids[i.saturating_sub(self.order - 1)..i], ids[i]))
            .sum()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "order={} backoff={}", self.order, self.backoff)?;
        let mut lines: Vec<(usize, String, u64)> = self
            .counts
            .iter()
            .map(|(gram, &c)| {
                let text = gram
                    .iter()
                    .map(|&id| self.words[id as usize].as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                (gram.len(), text, c)
            })
            .collect();
        lines.sort();
        for (k, text, c) in lines {
            writeln!(w, "{k}\t{text}\t{c}")?;
        }
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<NGramModel> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or(Error::Empty("language model file"))?
            .map_err(|e| Error::io(path, e))?;
        let (mut order, mut backoff) = (None, None);
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("order", v)) => order = v.parse::<usize>().ok(),
                Some(("backoff", v)) => backoff = v.parse::<f64>().ok(),
                _ => return Err(Error::format(format!("bad LM header {header:?}"))),
            }
        }
        let (order, backoff) = match (order, backoff) {
            (Some(o), Some(b)) if o >= 1 && b > 0.0 => (o, b),
            _ => return Err(Error::format(format!("bad LM header {header:?}"))),
        };
        let mut model = NGramModel::empty(order, backoff);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let bad = || Error::format(format!("{}:{}: bad n-gram line", path.display(), i + 2));
            let mut fields = line.split('\t');
            let k: usize = fields.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let words: Vec<&str> = fields.next().ok_or_else(bad)?.split(' ').collect();
            let c: u64 = fields.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            if k != words.len() || k > order || c == 0 {
                return Err(bad());
            }
            let gram: Vec<u32> = words.iter().map(|w| model.intern(w)).collect();
            model.add_count(gram, c);
        }
        Ok(model)
    }
}

pub fn train_lm<I, S>(sentences: I, order: usize) -> Result<NGramModel>
where
    I: IntoIterator<Item = S>,
    S: Borrow<Sentence>,
{
    train_lm_with_backoff(sentences, order, DEFAULT_BACKOFF)
}

pub fn train_lm_with_backoff<I, S>(sentences: I, order: usize, backoff: f64) -> Result<NGramModel>
where
    I: IntoIterator<Item = S>,
    S: Borrow<Sentence>,
{
    if order == 0 {
        return Err(Error::Config("LM order must be at least 1".into()));
    }
    let mut model = NGramModel::empty(order, backoff);
    let mut seen = 0usize;
    for sentence in sentences {
        seen += 1;
        let mut seq = vec![START_ID; order - 1];
        for form in sentence.borrow().forms() {
            let id = model.intern(form);
            seq.push(id);
        }
        seq.push(END_ID);
        for i in order - 1..seq.len() {
            for k in 1..=order {
                model.add_count(seq[i + 1 - k..=i].to_vec(), 1);
            }
        }
    }
    if seen == 0 {
        return Err(Error::Empty("no sentences to train the language model"));
    }
    Ok(model)
}

/// Free-function form of [`NGramModel::score`].
pub fn lm_score(model: &NGramModel, word: &str, state: &LMState) -> (f64, LMState) {
    model.score(word, state)
}
