//! Seeded synthetic corpora for tests, benchmarks and demos.
//!
//! * sense corpus: an ambiguous source word whose translation is fixed by an
//!   unaligned source cue word before it;
//! * agreement corpus: a target noun whose inflection is fixed only by an
//!   inserted target determiner, invisible on the source side;
//! * toy world: small noun phrases and verbs with reordered, gender-inflected
//!   adjectives and determiners, used to exercise the decoder.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AlignedSentencePair, Sentence};

pub const SENSE_WORDS: usize = 4;
pub const CUES_PER_SENSE: usize = 4;
pub const AGREEMENT_NOUNS: usize = 4;

fn aligned(source: &[String], target: &[String], links: &[(usize, usize)]) -> AlignedSentencePair {
    let align = links
        .iter()
        .map(|(s, t)| format!("{s}-{t}"))
        .collect::<Vec<_>>()
        .join(" ");
    AlignedSentencePair::parse(&source.join(" "), &target.join(" "), &align)
        .expect("generated pairs are well formed")
}

fn src(form: &str, lemma: &str, tag: &str, afun: &str, parent: &str) -> String {
    format!("{form}|{lemma}|{tag}|{afun}|{parent}")
}

fn tgt(form: &str, lemma: &str, tag: &str) -> String {
    format!("{form}|{lemma}|{tag}")
}

/// `n` two-word sentences `cue amb`. Sentence `i` uses ambiguous word
/// `i % 4` with sense `(i / 4) % 2`, so every block of eight sentences has
/// both senses of every word once. The cue is drawn from the sense's cue set
/// and left unaligned.
pub fn sense_corpus(n: usize, seed: u64) -> Vec<AlignedSentencePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let word = i % SENSE_WORDS;
            let sense = (i / SENSE_WORDS) % 2;
            let cue = format!("cue{sense}{}", rng.gen_range(0..CUES_PER_SENSE));
            let amb = format!("amb{word}");
            let translation = format!("amb{word}{}", ['a', 'b'][sense]);
            aligned(
                &[
                    src(&cue, &cue, "C", "Atr", &amb),
                    src(&amb, &amb, "N", "Sb", "-"),
                ],
                &[tgt(&translation, &translation, "N")],
                &[(1, 0)],
            )
        })
        .collect()
}

/// `n` one-word sentences: source `nounK`, target `det nounK<g>` where the
/// gender `g` alternates per word every four sentences and the determiner
/// is unaligned.
pub fn agreement_corpus(n: usize) -> Vec<AlignedSentencePair> {
    (0..n)
        .map(|i| {
            let noun = format!("noun{}", i % AGREEMENT_NOUNS);
            let gender = ["m", "f"][(i / AGREEMENT_NOUNS) % 2];
            let det = format!("d{gender}");
            aligned(
                &[src(&noun, &noun, "N", "Sb", "-")],
                &[
                    tgt(&det, "d", &format!("ART.{gender}")),
                    tgt(&format!("{noun}{gender}"), &noun, &format!("N.{gender}")),
                ],
                &[(0, 1)],
            )
        })
        .collect()
}

struct Noun {
    source: &'static str,
    target: &'static str,
    gender: usize,
}

const NOUNS: [Noun; 3] = [
    Noun {
        source: "dog",
        target: "hund",
        gender: 0,
    },
    Noun {
        source: "cat",
        target: "katze",
        gender: 1,
    },
    Noun {
        source: "house",
        target: "haus",
        gender: 2,
    },
];
const GENDERS: [&str; 3] = ["m", "f", "n"];
const DETERMINERS: [&str; 3] = ["der", "die", "das"];
const ADJECTIVES: [(&str, &str); 2] = [("big", "gross"), ("red", "rot")];
const ADJ_ENDINGS: [&str; 3] = ["er", "e", "es"];
const VERBS: [(&str, &str, &str); 2] = [("sees", "sieht", "sehen"), ("likes", "mag", "moegen")];

fn noun_phrase_words(
    np: NounPhrase,
    head: &str,
    afun: &str,
    src_out: &mut Vec<String>,
    tgt_out: &mut Vec<String>,
) -> Vec<(usize, usize)> {
    let noun = &NOUNS[np.noun];
    let g = noun.gender;
    let (s0, t0) = (src_out.len(), tgt_out.len());
    src_out.push(src("the", "the", "DT", "AuxA", noun.source));
    tgt_out.push(tgt(DETERMINERS[g], "d", &format!("ART.{}", GENDERS[g])));
    let mut links = vec![(s0, t0)];
    if let Some(a) = np.adjective {
        let form = ADJECTIVES[a].0;
        src_out.push(src(form, form, "JJ", "Atr", noun.source));
    }
    src_out.push(src(noun.source, noun.source, "NN", afun, head));
    tgt_out.push(tgt(noun.target, noun.target, &format!("N.{}", GENDERS[g])));
    let noun_src = src_out.len() - 1;
    links.push((noun_src, t0 + 1));
    if let Some(a) = np.adjective {
        let lemma = ADJECTIVES[a].1;
        tgt_out.push(tgt(
            &format!("{lemma}{}", ADJ_ENDINGS[g]),
            lemma,
            &format!("ADJ.{}", GENDERS[g]),
        ));
        links.push((s0 + 1, t0 + 2));
    }
    links
}

/// Source `the (adj) noun verb the (adj) noun`; target puts adjectives after
/// their noun and inflects determiners and adjectives for gender.
pub fn toy_pair(
    subject: NounPhrase,
    verb: usize,
    object: NounPhrase,
) -> AlignedSentencePair {
    let (mut s, mut t) = (Vec::new(), Vec::new());
    let (vsrc, vtgt, vlemma) = VERBS[verb];
    let mut links = noun_phrase_words(subject, vsrc, "Sb", &mut s, &mut t);
    links.push((s.len(), t.len()));
    s.push(src(vsrc, vsrc, "VBZ", "Pred", "-"));
    t.push(tgt(vtgt, vlemma, "V"));
    links.extend(noun_phrase_words(object, vsrc, "Obj", &mut s, &mut t));
    aligned(&s, &t, &links)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NounPhrase {
    pub noun: usize,
    pub adjective: Option<usize>,
}

fn all_noun_phrases() -> Vec<NounPhrase> {
    let mut out = Vec::new();
    for noun in 0..NOUNS.len() {
        out.push(NounPhrase {
            noun,
            adjective: None,
        });
        for a in 0..ADJECTIVES.len() {
            out.push(NounPhrase {
                noun,
                adjective: Some(a),
            });
        }
    }
    out
}

/// `n` random toy-world sentence pairs.
pub fn toy_corpus(n: usize, seed: u64) -> Vec<AlignedSentencePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nps = all_noun_phrases();
    (0..n)
        .map(|_| {
            let subject = *nps.choose(&mut rng).expect("non-empty");
            let object = *nps.choose(&mut rng).expect("non-empty");
            toy_pair(subject, rng.gen_range(0..VERBS.len()), object)
        })
        .collect()
}

/// Every toy-world sentence pair with at most `max_len` source words, in a
/// fixed order.
pub fn toy_grammar(max_len: usize) -> Vec<AlignedSentencePair> {
    let nps = all_noun_phrases();
    let mut out = Vec::new();
    for &subject in &nps {
        for verb in 0..VERBS.len() {
            for &object in &nps {
                let pair = toy_pair(subject, verb, object);
                if pair.source.len() <= max_len {
                    out.push(pair);
                }
            }
        }
    }
    out
}

/// Source sides of `n` random toy sentences: many repeated phrases and
/// target contexts.
pub fn toy_sentences(n: usize, seed: u64) -> Vec<Sentence> {
    toy_corpus(n, seed).into_iter().map(|p| p.source).collect()
}

/// Renders a pair as its three file lines (source, target, alignment).
pub fn pair_lines(pair: &AlignedSentencePair) -> (String, String, String) {
    (
        pair.source.to_string(),
        pair.target.to_string(),
        pair.alignment.to_string(),
    )
}
