//! Staged tweet cleaning.
//!
//! [`Cleaner::clean`] runs, in order: lowercasing, pattern replacement
//! (URLs, mentions, hashtags, character runs, emoji), contraction expansion,
//! symbol stripping, whitespace tokenisation, slang and digit-word expansion,
//! stopword removal, lemmatisation and phonetic normalisation. Records left
//! with no tokens are marked [`DropReason::Empty`]; records with fewer than
//! `min_words` tokens are marked [`DropReason::TooShort`].
//!
//! Contractions are expanded between placeholder marking and symbol
//! stripping, because stripping removes the apostrophes they are keyed on.
//!
//! Phonetic normalisation needs token frequencies from a training split; it
//! is skipped until [`Cleaner::fit_phonetic`] has been called.

mod lemma;
pub mod lexicon;
mod patterns;
mod phonetic;

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Record;
use crate::error::Result;

pub use lemma::lemmatize;
pub use lexicon::LexiconSet;
pub use patterns::{collapse_runs, expand_contractions, expand_slang, remove_stopwords, replace_patterns};
pub use phonetic::{phonetic_key, phonetic_normalize, PhoneticIndex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageToggles {
    pub lowercase: bool,
    pub patterns: bool,
    pub contractions: bool,
    pub slang: bool,
    pub stopwords: bool,
    pub lemmatize: bool,
    pub phonetic: bool,
}

impl Default for StageToggles {
    fn default() -> Self {
        Self {
            lowercase: true,
            patterns: true,
            contractions: true,
            slang: true,
            stopwords: true,
            lemmatize: true,
            phonetic: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanConfig {
    pub min_words: usize,
    pub stages: StageToggles,
    /// Directory of lexicon files; the bundled set when absent.
    pub lexicon_dir: Option<PathBuf>,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self {
            min_words: 5,
            stages: StageToggles::default(),
            lexicon_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DropReason {
    Empty,
    TooShort,
    NotEnglish,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanedRecord {
    pub original: Record,
    pub cleaned_text: String,
    pub tokens: Vec<String>,
    pub dropped: Option<DropReason>,
}

impl CleanedRecord {
    pub fn kept(&self) -> bool {
        self.dropped.is_none()
    }

    /// The cleaned text paired with the original label.
    pub fn to_record(&self) -> Record {
        Record::new(self.cleaned_text.clone(), self.original.label)
    }
}

#[derive(Debug, Clone)]
pub struct Cleaner {
    config: CleanConfig,
    lex: LexiconSet,
    placeholders: HashSet<String>,
    phonetic: Option<PhoneticIndex>,
}

impl Cleaner {
    pub fn new(config: CleanConfig) -> Result<Self> {
        let lex = match &config.lexicon_dir {
            Some(dir) => LexiconSet::load_dir(dir)?,
            None => LexiconSet::bundled(),
        };
        Ok(Self::with_lexicons(config, lex))
    }

    pub fn with_lexicons(config: CleanConfig, lex: LexiconSet) -> Self {
        let placeholders = lex.placeholder_tokens();
        Self {
            config,
            lex,
            placeholders,
            phonetic: None,
        }
    }

    pub fn config(&self) -> &CleanConfig {
        &self.config
    }

    pub fn lexicons(&self) -> &LexiconSet {
        &self.lex
    }

    pub fn phonetic_index(&self) -> Option<&PhoneticIndex> {
        self.phonetic.as_ref()
    }

    /// Tokens of every stage before phonetic normalisation.
    fn pre_phonetic_tokens(&self, text: &str) -> Vec<String> {
        let st = &self.config.stages;
        let mut s = if st.lowercase {
            text.to_lowercase()
        } else {
            text.to_string()
        };
        if st.patterns {
            s = patterns::mark_patterns(&s, &self.lex);
        }
        if st.contractions {
            s = expand_contractions(&s, &self.lex);
        }
        if st.patterns {
            s = patterns::strip_symbols(&s, &self.placeholders);
        }
        let mut tokens: Vec<String> = s.split_whitespace().map(str::to_string).collect();
        if st.slang {
            tokens = expand_slang(&tokens, &self.lex);
        }
        if st.stopwords {
            tokens = remove_stopwords(&tokens, &self.lex);
        }
        if st.lemmatize {
            for t in &mut tokens {
                *t = lemmatize(t, &self.lex);
            }
        }
        tokens
    }

    /// Build the phonetic index from the token frequencies of `training`
    /// (records that survive cleaning only).
    pub fn fit_phonetic(&mut self, training: &[Record]) {
        let per_record: Vec<Vec<String>> = training
            .par_iter()
            .map(|r| self.pre_phonetic_tokens(&r.text))
            .collect();
        let mut freq: HashMap<String, u64> = HashMap::new();
        for tokens in per_record {
            if tokens.len() < self.config.min_words.max(1) {
                continue;
            }
            for t in tokens {
                *freq.entry(t).or_default() += 1;
            }
        }
        self.phonetic = Some(PhoneticIndex::from_frequencies(&freq, &self.lex));
    }

    pub fn set_phonetic_index(&mut self, index: Option<PhoneticIndex>) {
        self.phonetic = index;
    }

    pub fn clean(&self, record: &Record) -> CleanedRecord {
        let mut tokens = self.pre_phonetic_tokens(&record.text);
        if self.config.stages.phonetic {
            if let Some(index) = &self.phonetic {
                tokens = phonetic_normalize(&tokens, index);
            }
        }
        let dropped = if tokens.is_empty() {
            Some(DropReason::Empty)
        } else if tokens.len() < self.config.min_words {
            Some(DropReason::TooShort)
        } else {
            None
        };
        CleanedRecord {
            original: record.clone(),
            cleaned_text: tokens.join(" "),
            tokens,
            dropped,
        }
    }

    /// Order-preserving parallel map of [`Cleaner::clean`].
    pub fn clean_all(&self, records: &[Record]) -> Vec<CleanedRecord> {
        records.par_iter().map(|r| self.clean(r)).collect()
    }
}

/// One-shot cleaning of a single record.
pub fn clean_record(
    record: &Record,
    config: &CleanConfig,
    lexicons: &LexiconSet,
    phonetic: Option<&PhoneticIndex>,
) -> CleanedRecord {
    let mut cleaner = Cleaner::with_lexicons(config.clone(), lexicons.clone());
    cleaner.phonetic = phonetic.cloned();
    cleaner.clean(record)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthStat {
    pub original_len: usize,
    pub cleaned_len: usize,
    pub token_count: usize,
}

/// Character lengths before and after cleaning plus token counts.
pub fn length_stats(records: &[CleanedRecord]) -> Vec<LengthStat> {
    records
        .iter()
        .map(|r| LengthStat {
            original_len: r.original.text.chars().count(),
            cleaned_len: r.cleaned_text.chars().count(),
            token_count: r.cleaned_text.split_whitespace().count(),
        })
        .collect()
}
