//! Feature templates, canonical feature keys and feature hashing.
//!
//! Shared (label-independent) features are split into two namespaces: those
//! reading only the source sentence and those reading the target-side
//! context. Translation features describe a candidate phrase. Scores only use
//! the Cartesian product of a shared namespace with the translation
//! namespace, plus the translation features themselves.
//!
//! This module is the only place features are built; training-example
//! extraction and the decoder both go through it.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::corpus::{Factor, FactoredWord, Sentence, Side, SENTENCE_END, SENTENCE_START};
use crate::error::{Error, Result};
use crate::phrases::{Span, TranslationOption};

pub const DEFAULT_HASH_BITS: u32 = 22;
pub const TARGET_CONTEXT_SIZE: usize = 2;
const NULL_ALIGNMENT: &str = "NULL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Namespace {
    SourceShared,
    TargetShared,
    Translation,
    /// Product of a shared namespace with [`Namespace::Translation`].
    Crossed,
}

impl Namespace {
    pub fn byte(self) -> u8 {
        match self {
            Namespace::SourceShared => b's',
            Namespace::TargetShared => b'g',
            Namespace::Translation => b't',
            Namespace::Crossed => b'x',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactorCombo(Vec<Factor>);

impl FactorCombo {
    /// Accepts both `l+t` and `lt`.
    pub fn parse(text: &str, side: Side) -> Result<FactorCombo> {
        let mut factors = Vec::new();
        for c in text.chars().filter(|&c| c != '+') {
            let f = Factor::from_letter(c)
                .ok_or_else(|| Error::Config(format!("unknown factor letter {c:?} in {text:?}")))?;
            if !f.available_on(side) {
                return Err(Error::Config(format!(
                    "factor {c:?} is not available on the {side:?} side"
                )));
            }
            factors.push(f);
        }
        if factors.is_empty() {
            return Err(Error::Config(format!("empty factor combination {text:?}")));
        }
        Ok(FactorCombo(factors))
    }

    pub fn letters(&self) -> String {
        self.0.iter().map(|f| f.letter()).collect()
    }

    fn push_values<'a>(&self, word: &'a FactoredWord, out: &mut Vec<&'a str>) {
        for &f in &self.0 {
            out.push(word.factor(f).unwrap_or(NULL_ALIGNMENT));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Template {
    SourceIndicator(FactorCombo),
    SourceInternal(FactorCombo),
    SourceContext {
        factors: FactorCombo,
        window: usize,
    },
    TargetContext {
        factors: FactorCombo,
        size: usize,
    },
    BilingualContext {
        target: FactorCombo,
        source: FactorCombo,
        size: usize,
    },
    TargetIndicator(FactorCombo),
    TargetInternal(FactorCombo),
}

impl Template {
    fn name(&self) -> &'static str {
        match self {
            Template::SourceIndicator(_) => "source_indicator",
            Template::SourceInternal(_) => "source_internal",
            Template::SourceContext { .. } => "source_context",
            Template::TargetContext { .. } => "target_context",
            Template::BilingualContext { .. } => "bilingual_context",
            Template::TargetIndicator(_) => "target_indicator",
            Template::TargetInternal(_) => "target_internal",
        }
    }

    fn parse(line: &str) -> Result<Template> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| Error::Config(format!("{msg}: {line:?}"));
        if fields.len() < 2 || fields.len() > 3 {
            return Err(bad("expected `template factors [size]`"));
        }
        let size = match fields.get(2) {
            Some(v) => Some(
                v.parse::<usize>()
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| bad("context size must be a positive integer"))?,
            ),
            None => None,
        };
        let target_size = |size: Option<usize>| {
            let n = size.unwrap_or(TARGET_CONTEXT_SIZE);
            if n > TARGET_CONTEXT_SIZE {
                Err(bad("target context size is at most 2"))
            } else {
                Ok(n)
            }
        };
        let no_size = |t: Template| {
            if size.is_some() {
                Err(bad("template takes no context size"))
            } else {
                Ok(t)
            }
        };
        let (name, combo) = (fields[0], fields[1]);
        match name {
            "source_indicator" => no_size(Template::SourceIndicator(FactorCombo::parse(
                combo,
                Side::Source,
            )?)),
            "source_internal" => no_size(Template::SourceInternal(FactorCombo::parse(
                combo,
                Side::Source,
            )?)),
            "source_context" => Ok(Template::SourceContext {
                factors: FactorCombo::parse(combo, Side::Source)?,
                window: size.ok_or_else(|| bad("source_context needs a window size"))?,
            }),
            "target_context" => Ok(Template::TargetContext {
                factors: FactorCombo::parse(combo, Side::Target)?,
                size: target_size(size)?,
            }),
            "bilingual_context" => {
                let (t, s) = combo
                    .split_once('/')
                    .ok_or_else(|| bad("bilingual_context expects target/source factors"))?;
                Ok(Template::BilingualContext {
                    target: FactorCombo::parse(t, Side::Target)?,
                    source: FactorCombo::parse(s, Side::Source)?,
                    size: target_size(size)?,
                })
            }
            "target_indicator" => no_size(Template::TargetIndicator(FactorCombo::parse(
                combo,
                Side::Target,
            )?)),
            "target_internal" => no_size(Template::TargetInternal(FactorCombo::parse(
                combo,
                Side::Target,
            )?)),
            _ => Err(bad("unknown template")),
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Template::SourceIndicator(c)
            | Template::SourceInternal(c)
            | Template::TargetIndicator(c)
            | Template::TargetInternal(c) => write!(f, "{} {}", self.name(), c.letters()),
            Template::SourceContext { factors, window } => {
                write!(f, "{} {} {}", self.name(), factors.letters(), window)
            }
            Template::TargetContext { factors, size } => {
                write!(f, "{} {} {}", self.name(), factors.letters(), size)
            }
            Template::BilingualContext {
                target,
                source,
                size,
            } => write!(
                f,
                "{} {}/{} {}",
                self.name(),
                target.letters(),
                source.letters(),
                size
            ),
        }
    }
}

/// Which templates are active, with their factor combinations and context
/// sizes. Word-pair translation features (source form paired with target
/// lemma along each internal alignment link) are always on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureConfig {
    templates: Vec<Template>,
}

impl FeatureConfig {
    pub fn new(templates: Vec<Template>) -> Self {
        FeatureConfig { templates }
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn parse(text: &str) -> Result<FeatureConfig> {
        let templates = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(Template::parse)
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureConfig { templates })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<FeatureConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        FeatureConfig::parse(&text)
    }

    /// The richest template set (forms, lemmas, tags, analytical functions,
    /// parent lemmas, target and bilingual context).
    pub fn full() -> FeatureConfig {
        FeatureConfig::parse(
            "source_indicator f
             source_indicator l
             source_indicator l+t
             source_indicator t
             source_internal f
             source_internal f+a
             source_internal f+p
             source_internal l
             source_internal l+t
             source_internal t
             source_internal a+p
             source_context f 3
             source_context l 3
             source_context t 5
             target_context f 2
             target_context l 2
             target_context t 2
             target_context l+t 2
             bilingual_context l+t/l+t 2
             target_indicator f
             target_indicator l
             target_indicator t
             target_internal f
             target_internal l
             target_internal l+t
             target_internal t",
        )
        .expect("built-in config parses")
    }

    /// Same templates without anything that reads the target-side context.
    pub fn source_only(&self) -> FeatureConfig {
        FeatureConfig {
            templates: self
                .templates
                .iter()
                .filter(|t| {
                    !matches!(
                        t,
                        Template::TargetContext { .. } | Template::BilingualContext { .. }
                    )
                })
                .cloned()
                .collect(),
        }
    }

    pub fn uses_target_context(&self) -> bool {
        self.templates.iter().any(|t| {
            matches!(
                t,
                Template::TargetContext { .. } | Template::BilingualContext { .. }
            )
        })
    }

    pub fn fingerprint(&self) -> String {
        format!("{:016x}", hash64(self.to_string().as_bytes()))
    }
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig::full()
    }
}

impl fmt::Display for FeatureConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.templates {
            writeln!(f, "{t}")?;
        }
        Ok(())
    }
}

fn escape(value: &str, out: &mut String) {
    for c in value.chars() {
        if c == '^' || c == '~' || c.is_whitespace() {
            out.push('_');
        } else {
            out.push(c);
        }
    }
}

/// `template^letters^offset^v1~v2~…`; the offset part is omitted when
/// absent, and so is the letters part when empty.
pub fn canonical_key<S: AsRef<str>>(
    template_id: &str,
    factor_letters: &str,
    offset: Option<i32>,
    values: &[S],
) -> String {
    let mut key = String::with_capacity(32);
    key.push_str(template_id);
    key.push('^');
    if !factor_letters.is_empty() {
        key.push_str(factor_letters);
        key.push('^');
    }
    if let Some(o) = offset {
        key.push_str(&o.to_string());
        key.push('^');
    }
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            key.push('~');
        }
        escape(v.as_ref(), &mut key);
    }
    key
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const CROSS_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// Murmur3 64-bit finalizer.
fn fmix64(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^= h >> 33;
    h
}

/// FNV-1a over the bytes, followed by the murmur3 finalizer.
pub fn hash64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    fmix64(h)
}

fn mask(hash_bits: u32) -> u64 {
    debug_assert!((1..=31).contains(&hash_bits));
    (1u64 << hash_bits) - 1
}

/// `hash64(namespace_byte ++ key) mod 2^hash_bits`.
pub fn hash_feature(namespace: Namespace, key: &str, hash_bits: u32) -> u32 {
    let mut h = FNV_OFFSET;
    for &b in std::iter::once(&namespace.byte()).chain(key.as_bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    (fmix64(h) & mask(hash_bits)) as u32
}

/// Index of the conjunction of a shared feature and a translation feature:
/// `fmix64((shared << 32 | translation) ^ seed) mod 2^hash_bits`.
#[inline]
pub fn cross_index(shared: u32, translation: u32, hash_bits: u32) -> u32 {
    let packed = ((shared as u64) << 32) | translation as u64;
    (fmix64(packed ^ CROSS_SEED) & mask(hash_bits)) as u32
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub namespace: Namespace,
    pub key: String,
    pub value: f64,
}

/// Hashed sparse features of one namespace, sorted by index. Colliding
/// entries are kept separately and add up when scored.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub namespace: Namespace,
    pub items: Vec<(u32, f64)>,
}

impl FeatureSet {
    pub fn empty(namespace: Namespace) -> Self {
        FeatureSet {
            namespace,
            items: Vec::new(),
        }
    }

    pub fn from_keys<S: AsRef<str>>(namespace: Namespace, keys: &[S], hash_bits: u32) -> Self {
        let mut items: Vec<(u32, f64)> = keys
            .iter()
            .map(|k| (hash_feature(namespace, k.as_ref(), hash_bits), 1.0))
            .collect();
        items.sort_by_key(|&(i, _)| i);
        FeatureSet { namespace, items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = u32> + '_ {
        self.items.iter().map(|&(i, _)| i)
    }
}

/// Materialized Cartesian product of a shared set with a translation set.
pub fn cross(shared: &FeatureSet, translation: &FeatureSet, hash_bits: u32) -> FeatureSet {
    let mut items = Vec::with_capacity(shared.len() * translation.len());
    for &(s, sv) in &shared.items {
        for &(t, tv) in &translation.items {
            items.push((cross_index(s, t, hash_bits), sv * tv));
        }
    }
    items.sort_by_key(|&(i, _)| i);
    FeatureSet {
        namespace: Namespace::Crossed,
        items,
    }
}

/// One preceding target word and the source words aligned to it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContextWord {
    pub word: FactoredWord,
    pub aligned: Vec<FactoredWord>,
}

impl ContextWord {
    pub fn start() -> Self {
        ContextWord {
            word: FactoredWord::padding(Side::Target, SENTENCE_START),
            aligned: Vec::new(),
        }
    }
}

/// The two target words preceding the current phrase; index 0 is the
/// immediately preceding word (offset -1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TargetContext {
    positions: [ContextWord; TARGET_CONTEXT_SIZE],
}

impl TargetContext {
    pub fn sentence_start() -> Self {
        TargetContext {
            positions: [ContextWord::start(), ContextWord::start()],
        }
    }

    /// `previous` is the word at offset -1, `before_previous` at -2.
    pub fn new(previous: ContextWord, before_previous: ContextWord) -> Self {
        TargetContext {
            positions: [previous, before_previous],
        }
    }

    pub fn at(&self, offset: usize) -> &ContextWord {
        &self.positions[offset - 1]
    }

    /// Context after appending `word` to the translation.
    pub fn push(&self, word: ContextWord) -> Self {
        TargetContext {
            positions: [word, self.positions[0].clone()],
        }
    }
}

fn span_words(sentence: &Sentence, span: Span) -> &[FactoredWord] {
    &sentence.words()[span.0..=span.1]
}

pub fn source_shared_keys(sentence: &Sentence, span: Span, config: &FeatureConfig) -> Vec<String> {
    let words = span_words(sentence, span);
    let start_pad = FactoredWord::padding(Side::Source, SENTENCE_START);
    let end_pad = FactoredWord::padding(Side::Source, SENTENCE_END);
    let mut keys = Vec::new();
    let mut values: Vec<&str> = Vec::new();
    for template in &config.templates {
        match template {
            Template::SourceIndicator(combo) => {
                values.clear();
                for w in words {
                    combo.push_values(w, &mut values);
                }
                keys.push(canonical_key("sind", &combo.letters(), None, &values));
            }
            Template::SourceInternal(combo) => {
                for w in words {
                    values.clear();
                    combo.push_values(w, &mut values);
                    keys.push(canonical_key("sint", &combo.letters(), None, &values));
                }
            }
            Template::SourceContext { factors, window } => {
                let letters = factors.letters();
                let w = *window as isize;
                for off in (-w..=-1).chain(1..=w) {
                    let pos = if off < 0 {
                        span.0 as isize + off
                    } else {
                        span.1 as isize + off
                    };
                    let word = if pos < 0 {
                        &start_pad
                    } else if pos as usize >= sentence.len() {
                        &end_pad
                    } else {
                        &sentence.words()[pos as usize]
                    };
                    values.clear();
                    factors.push_values(word, &mut values);
                    keys.push(canonical_key("sctx", &letters, Some(off as i32), &values));
                }
            }
            _ => {}
        }
    }
    keys
}

pub fn target_shared_keys(context: &TargetContext, config: &FeatureConfig) -> Vec<String> {
    let mut keys = Vec::new();
    let mut values: Vec<&str> = Vec::new();
    for template in &config.templates {
        match template {
            Template::TargetContext { factors, size } => {
                let letters = factors.letters();
                for k in 1..=*size {
                    values.clear();
                    factors.push_values(&context.at(k).word, &mut values);
                    keys.push(canonical_key("tctx", &letters, Some(-(k as i32)), &values));
                }
            }
            Template::BilingualContext {
                target,
                source,
                size,
            } => {
                let letters = format!("{}{}", target.letters(), source.letters());
                for k in 1..=*size {
                    let cw = context.at(k);
                    if cw.aligned.is_empty() {
                        values.clear();
                        target.push_values(&cw.word, &mut values);
                        values.push(NULL_ALIGNMENT);
                        keys.push(canonical_key("bctx", &letters, Some(-(k as i32)), &values));
                    }
                    for src in &cw.aligned {
                        values.clear();
                        target.push_values(&cw.word, &mut values);
                        source.push_values(src, &mut values);
                        keys.push(canonical_key("bctx", &letters, Some(-(k as i32)), &values));
                    }
                }
            }
            _ => {}
        }
    }
    keys
}

pub fn translation_keys(option: &TranslationOption, config: &FeatureConfig) -> Vec<String> {
    let mut keys = Vec::new();
    let mut values: Vec<&str> = Vec::new();
    for template in &config.templates {
        match template {
            Template::TargetIndicator(combo) => {
                values.clear();
                for w in &option.target_phrase {
                    combo.push_values(w, &mut values);
                }
                keys.push(canonical_key("tind", &combo.letters(), None, &values));
            }
            Template::TargetInternal(combo) => {
                for w in &option.target_phrase {
                    values.clear();
                    combo.push_values(w, &mut values);
                    keys.push(canonical_key("tint", &combo.letters(), None, &values));
                }
            }
            _ => {}
        }
    }
    for (s, t) in option.internal_alignment.links() {
        if let (Some(src), Some(tgt)) = (option.source_phrase.get(s), option.target_phrase.get(t)) {
            keys.push(canonical_key(
                "tpair",
                "",
                None,
                &[src.as_str(), tgt.lemma()],
            ));
        }
    }
    keys
}

pub fn extract_source_shared(
    sentence: &Sentence,
    span: Span,
    config: &FeatureConfig,
    hash_bits: u32,
) -> FeatureSet {
    FeatureSet::from_keys(
        Namespace::SourceShared,
        &source_shared_keys(sentence, span, config),
        hash_bits,
    )
}

pub fn extract_target_shared(
    context: &TargetContext,
    config: &FeatureConfig,
    hash_bits: u32,
) -> FeatureSet {
    FeatureSet::from_keys(
        Namespace::TargetShared,
        &target_shared_keys(context, config),
        hash_bits,
    )
}

pub fn extract_translation(
    option: &TranslationOption,
    config: &FeatureConfig,
    hash_bits: u32,
) -> FeatureSet {
    FeatureSet::from_keys(
        Namespace::Translation,
        &translation_keys(option, config),
        hash_bits,
    )
}
