//! Seeded synthetic corpora for exercising the trainers end to end.
//!
//! Words are made of consonant-vowel syllables and kept only if the cleaning
//! pipeline maps each of them to itself and no two share a phonetic key, so
//! cleaning leaves the generated token streams intact.
//!
//! * [`sentiment_corpus`]: each document mixes neutral filler with cue words
//!   drawn from its class's pool (and occasionally the other class's).
//! * [`negation_corpus`]: each document carries a few polarity words of one
//!   polarity. In a minority of documents every polarity word is preceded
//!   by the negator and the label flips; elsewhere the negator still occurs,
//!   away from the polarity words. Unigram counts alone cannot see the flip.
//!
//! The bundled CSV files under `data/synthetic/` are the default outputs.

use std::collections::HashSet;

use crate::corpus::{read_csv, Corpus, Record, SentimentLabel};
use crate::error::Result;
use crate::rng::{derive_seed, SplitMix64};
use crate::textclean::{phonetic_key, CleanConfig, Cleaner};

pub const SENTIMENT_CSV: &str = include_str!("../data/synthetic/sentiment.csv");
pub const NEGATION_CSV: &str = include_str!("../data/synthetic/negation.csv");

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub docs: usize,
    pub seed: u64,
    pub min_len: usize,
    pub max_len: usize,
    pub neutral_words: usize,
    pub cue_words: usize,
    /// Probability that a token is a cue word of the document's class.
    pub cue_rate: f64,
    /// Probability that a token is a cue word of the other class.
    pub noise_rate: f64,
    /// Share of negated documents in the negation corpus.
    pub negation_rate: f64,
    /// Polarity words per document in the negation corpus.
    pub polarity_words: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            docs: 2000,
            seed: 2021,
            min_len: 12,
            max_len: 24,
            neutral_words: 200,
            cue_words: 40,
            cue_rate: 0.35,
            noise_rate: 0.03,
            negation_rate: 0.35,
            polarity_words: 3,
        }
    }
}

/// `count` distinct pipeline-stable words with pairwise distinct phonetic
/// keys.
pub fn word_pool(count: usize, seed: u64) -> Vec<String> {
    let cleaner = Cleaner::new(CleanConfig {
        min_words: 1,
        ..CleanConfig::default()
    })
    .expect("bundled lexicons load");
    let mut rng = SplitMix64::new(seed);
    let mut words = Vec::with_capacity(count);
    let mut keys = HashSet::new();
    while words.len() < count {
        let syllables = 2 + rng.below(2);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(CONSONANTS[rng.below(CONSONANTS.len())] as char);
            w.push(VOWELS[rng.below(VOWELS.len())] as char);
        }
        let out = cleaner.clean(&Record::new(w.clone(), SentimentLabel::Negative));
        if out.tokens != [w.clone()] {
            continue;
        }
        let key = phonetic_key(&w, cleaner.lexicons()).expect("alphabetic word");
        if keys.insert(key) {
            words.push(w);
        }
    }
    words
}

fn length(rng: &mut SplitMix64, spec: &SyntheticSpec) -> usize {
    spec.min_len + rng.below(spec.max_len - spec.min_len + 1)
}

fn label(rng: &mut SplitMix64) -> SentimentLabel {
    if rng.below(2) == 1 {
        SentimentLabel::Positive
    } else {
        SentimentLabel::Negative
    }
}

pub fn sentiment_corpus(spec: &SyntheticSpec) -> Corpus {
    let pool = word_pool(spec.neutral_words + 2 * spec.cue_words, derive_seed(spec.seed, 0));
    let (neutral, cues) = pool.split_at(spec.neutral_words);
    let (neg, pos) = cues.split_at(spec.cue_words);
    let mut rng = SplitMix64::new(derive_seed(spec.seed, 1));
    let records = (0..spec.docs)
        .map(|_| {
            let y = label(&mut rng);
            let (own, other) = match y {
                SentimentLabel::Positive => (pos, neg),
                SentimentLabel::Negative => (neg, pos),
            };
            let n = length(&mut rng, spec);
            let words: Vec<&str> = (0..n)
                .map(|_| {
                    let u = rng.next_f64();
                    let src = if u < spec.cue_rate {
                        own
                    } else if u < spec.cue_rate + spec.noise_rate {
                        other
                    } else {
                        neutral
                    };
                    src[rng.below(src.len())].as_str()
                })
                .collect();
            Record::new(words.join(" "), y)
        })
        .collect();
    Corpus::new(records, format!("synthetic:sentiment:{}", spec.seed))
}

pub fn negation_corpus(spec: &SyntheticSpec) -> Corpus {
    let pool = word_pool(spec.neutral_words + 2 * spec.cue_words + 1, derive_seed(spec.seed, 2));
    let (neutral, rest) = pool.split_at(spec.neutral_words);
    let (good, rest) = rest.split_at(spec.cue_words);
    let (bad, negator) = rest.split_at(spec.cue_words);
    let negator = negator[0].as_str();
    let mut rng = SplitMix64::new(derive_seed(spec.seed, 3));
    let records = (0..spec.docs)
        .map(|_| {
            let positive_word = rng.below(2) == 1;
            let negated = rng.next_f64() < spec.negation_rate;
            let n = length(&mut rng, spec);
            // units keep a negator glued to the word it negates
            let mut units: Vec<(Vec<&str>, bool)> =
                (0..n).map(|_| (vec![neutral[rng.below(neutral.len())].as_str()], false)).collect();
            let src = if positive_word { good } else { bad };
            for _ in 0..spec.polarity_words {
                let w = src[rng.below(src.len())].as_str();
                let unit = if negated { vec![negator, w] } else { vec![w] };
                let at = rng.below(units.len() + 1);
                units.insert(at, (unit, true));
            }
            if !negated {
                // same negator count per document, never right before a polarity word
                for _ in 0..spec.polarity_words {
                    loop {
                        let at = rng.below(units.len() + 1);
                        if units.get(at).map_or(true, |u| !u.1) {
                            units.insert(at, (vec![negator], false));
                            break;
                        }
                    }
                }
            }
            let words: Vec<&str> = units.into_iter().flat_map(|u| u.0).collect();
            let y = if positive_word != negated {
                SentimentLabel::Positive
            } else {
                SentimentLabel::Negative
            };
            Record::new(words.join(" "), y)
        })
        .collect();
    Corpus::new(records, format!("synthetic:negation:{}", spec.seed))
}

pub fn bundled_sentiment() -> Result<Corpus> {
    read_csv(SENTIMENT_CSV.as_bytes(), "data/synthetic/sentiment.csv".as_ref())
}

pub fn bundled_negation() -> Result<Corpus> {
    read_csv(NEGATION_CSV.as_bytes(), "data/synthetic/negation.csv".as_ref())
}
