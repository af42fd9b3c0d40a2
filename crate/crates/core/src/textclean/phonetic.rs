//! Soundex-style phonetic keys and spelling normalisation by key class.
//!
//! A key is the first letter followed by three digits. Before coding, the
//! rewrite rules of the phonetic table run left to right over the token
//! (`ght` → `t`, `ph` → `f`, …). Letters in a digit class emit that digit
//! unless it repeats the previous code; separator letters (vowels) break a
//! repeat; skipped letters (`h`, `w`) are transparent. Short keys are padded
//! with `0`.

use std::collections::HashMap;

use super::lexicon::{LexiconSet, PhoneticClass, PhoneticRules};
use crate::error::{Error, Result};

fn is_alpha(token: &str) -> bool {
    !token.is_empty() && token.bytes().all(|b| b.is_ascii_lowercase())
}

fn key_with(token: &str, rules: &PhoneticRules) -> Result<String> {
    if token.is_empty() {
        return Err(Error::invalid("phonetic key of an empty token"));
    }
    if !is_alpha(token) {
        return Err(Error::invalid(format!("phonetic key needs a lowercase alphabetic token, got {token:?}")));
    }
    let mut s = token.to_string();
    for (from, to) in &rules.rewrites {
        s = s.replace(from.as_str(), to);
    }
    if s.is_empty() {
        s = token.to_string();
    }
    let mut chars = s.chars();
    let first = chars.next().expect("non-empty");
    let class = |c: char| rules.classes.get(&c).copied().unwrap_or(PhoneticClass::Separator);

    let mut key = String::with_capacity(4);
    key.push(first);
    let mut prev = match class(first) {
        PhoneticClass::Digit(d) => Some(d),
        _ => None,
    };
    for c in chars {
        if key.len() == 4 {
            break;
        }
        match class(c) {
            PhoneticClass::Digit(d) => {
                if prev != Some(d) {
                    key.push(char::from(b'0' + d));
                }
                prev = Some(d);
            }
            PhoneticClass::Separator => prev = None,
            PhoneticClass::Skip => {}
        }
    }
    while key.len() < 4 {
        key.push('0');
    }
    Ok(key)
}

/// Phonetic key of a lowercase alphabetic token.
pub fn phonetic_key(token: &str, lex: &LexiconSet) -> Result<String> {
    key_with(token, &lex.phonetic)
}

/// Maps each phonetic key to the most frequent training token carrying it
/// (ties go to the lexicographically smallest token).
#[derive(Debug, Clone)]
pub struct PhoneticIndex {
    rules: PhoneticRules,
    canonical: HashMap<String, (String, u64)>,
}

impl PhoneticIndex {
    pub fn from_frequencies<'a>(
        freq: impl IntoIterator<Item = (&'a String, &'a u64)>,
        lex: &LexiconSet,
    ) -> Self {
        let mut canonical: HashMap<String, (String, u64)> = HashMap::new();
        for (tok, &count) in freq {
            let Ok(key) = key_with(tok, &lex.phonetic) else {
                continue;
            };
            match canonical.get_mut(&key) {
                Some(best) => {
                    if count > best.1 || (count == best.1 && *tok < best.0) {
                        *best = (tok.clone(), count);
                    }
                }
                None => {
                    canonical.insert(key, (tok.clone(), count));
                }
            }
        }
        Self {
            rules: lex.phonetic.clone(),
            canonical,
        }
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }

    /// Canonical spelling for `token`; tokens with an unseen key, or that are
    /// not alphabetic, come back unchanged.
    pub fn normalize<'a>(&'a self, token: &'a str) -> &'a str {
        match key_with(token, &self.rules) {
            Ok(key) => self.canonical.get(&key).map_or(token, |(t, _)| t.as_str()),
            Err(_) => token,
        }
    }
}

pub fn phonetic_normalize(tokens: &[String], index: &PhoneticIndex) -> Vec<String> {
    tokens.iter().map(|t| index.normalize(t).to_string()).collect()
}
