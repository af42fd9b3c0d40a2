//! Rule-table lemmatizer.
//!
//! Exceptions are consulted first, then the first rule whose suffix matches
//! (and whose stem is long enough) rewrites the word. Rules whose replacement
//! equals their suffix block the rules after them. Verb rules (`-ing`, `-ed`)
//! need a vowel in the stem and then undouble a final consonant pair
//! (`runn` → `run`) or restore a silent `e` on short consonant-vowel-consonant
//! stems (`hop` → `hope`).
//!
//! Rewriting repeats until a fixed point so `buildings` lands on `build`. A
//! candidate that is a stopword, a slang/digit-word key, or contains a run of
//! three identical letters is rejected and the current form is kept.

use super::lexicon::{LemmaRule, LexiconSet};

fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

fn has_vowel(w: &[u8]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

/// Number of vowel→consonant transitions.
fn measure(w: &[u8]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..w.len() {
        let c = is_consonant(w, i);
        if c && prev_vowel {
            m += 1;
        }
        prev_vowel = !c;
    }
    m
}

fn ends_cvc(w: &[u8]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

fn verb_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && is_consonant(b, n - 1) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    if measure(b) == 1 && ends_cvc(b) {
        return format!("{stem}e");
    }
    stem.to_string()
}

fn apply_rule(word: &str, rule: &LemmaRule) -> Option<String> {
    let stem = word.strip_suffix(rule.suffix.as_str())?;
    if stem.len() < rule.min_stem {
        return None;
    }
    if rule.verb {
        if !has_vowel(stem.as_bytes()) {
            return None;
        }
        return Some(verb_stem(stem));
    }
    Some(format!("{stem}{}", rule.replacement))
}

fn step(word: &str, lex: &LexiconSet) -> Option<String> {
    if let Some(e) = lex.lemma_exceptions.get(word) {
        return Some(e.clone());
    }
    lex.lemma_rules.iter().find_map(|r| apply_rule(word, r))
}

pub(crate) fn has_triple_run(s: &str) -> bool {
    s.as_bytes().windows(3).any(|w| w[0] == w[1] && w[1] == w[2])
}

fn acceptable(candidate: &str, lex: &LexiconSet) -> bool {
    !candidate.is_empty()
        && !lex.stopwords.contains(candidate)
        && !lex.is_expandable(candidate)
        && !has_triple_run(candidate)
}

/// Reduce a lowercase alphabetic token to its lemma. Anything else is
/// returned unchanged.
pub fn lemmatize(token: &str, lex: &LexiconSet) -> String {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_lowercase()) {
        return token.to_string();
    }
    let mut current = token.to_string();
    for _ in 0..16 {
        match step(&current, lex) {
            Some(next) if next != current && acceptable(&next, lex) => current = next,
            _ => break,
        }
    }
    current
}
