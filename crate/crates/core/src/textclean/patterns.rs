//! Regex and character-level rewriting stages.

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use super::lexicon::LexiconSet;

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?:https?://|www\.)\S+").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@[\p{L}\p{N}_]+").unwrap());
static HASHTAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#+([\p{L}\p{N}_])").unwrap());
static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[\p{L}\p{N}_']+").unwrap());

/// Replace every run of three or more identical characters with two.
pub fn collapse_runs(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut prev = None;
    let mut run = 0;
    for c in s.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= 2 {
            out.push(c);
        }
    }
    out
}

fn map_emoji(s: &str, lex: &LexiconSet) -> String {
    if lex.emoji_max_len == 0 {
        return s.to_string();
    }
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    'outer: while i < chars.len() {
        if !chars[i].is_ascii() {
            let longest = lex.emoji_max_len.min(chars.len() - i);
            for len in (1..=longest).rev() {
                if let Some(tok) = lex.emoji.get(&chars[i..i + len]) {
                    out.push(' ');
                    out.push_str(tok);
                    out.push(' ');
                    i += len;
                    continue 'outer;
                }
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

/// Placeholder substitutions on lowercased text: URLs, mentions, hashtags,
/// character runs and mapped emoji.
pub(crate) fn mark_patterns(text: &str, lex: &LexiconSet) -> String {
    let s: String = text
        .chars()
        .map(|c| match c {
            '\u{2018}' | '\u{2019}' | '\u{02BC}' => '\'',
            c => c,
        })
        .collect();
    let s = URL.replace_all(&s, " <url> ");
    let s = MENTION.replace_all(&s, " <user> ");
    let s = HASHTAG.replace_all(&s, "$1");
    let s = collapse_runs(&s);
    map_emoji(&s, lex)
}

/// Accent folding, slash spacing and removal of everything outside
/// `[a-z0-9_]`, whitespace and known placeholders; then run and whitespace
/// collapsing.
pub(crate) fn strip_symbols(text: &str, placeholders: &HashSet<String>) -> String {
    let folded: String = text.nfd().filter(|c| !is_combining_mark(*c)).collect();
    let spaced = folded.replace('/', " / ");

    let mut out = String::with_capacity(spaced.len());
    let mut rest = spaced.as_str();
    while let Some(c) = rest.chars().next() {
        if c == '<' {
            if let Some(end) = rest.find('>') {
                let candidate = &rest[..=end];
                if placeholders.contains(candidate) {
                    out.push(' ');
                    out.push_str(candidate);
                    out.push(' ');
                    rest = &rest[end + 1..];
                    continue;
                }
            }
        }
        if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' {
            out.push(c);
        } else if c.is_whitespace() {
            out.push(' ');
        }
        rest = &rest[c.len_utf8()..];
    }
    let collapsed = collapse_runs(&out);
    collapsed.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lowercase, then every pattern rule: URLs → `<url>`, mentions → `<user>`,
/// `#tag` → `tag`, character runs cut to two, emoji → placeholder tokens
/// (unmapped emoji disappear), symbols removed, slashes split words, and
/// whitespace collapsed.
pub fn replace_patterns(text: &str, lex: &LexiconSet) -> String {
    let marked = mark_patterns(&text.to_lowercase(), lex);
    strip_symbols(&marked, &lex.placeholder_tokens())
}

/// Replace each word that is a contraction key with its expansion.
pub fn expand_contractions(text: &str, lex: &LexiconSet) -> String {
    WORD.replace_all(text, |caps: &regex::Captures<'_>| {
        let word = &caps[0];
        if let Some(exp) = lex.contractions.get(word) {
            return exp.clone();
        }
        // quoted words: 'can't'
        let inner = word.trim_matches('\'');
        if inner != word {
            if let Some(exp) = lex.contractions.get(inner) {
                let lead = &word[..word.len() - word.trim_start_matches('\'').len()];
                let trail = &word[word.trim_end_matches('\'').len()..];
                return format!("{lead}{exp}{trail}");
            }
        }
        word.to_string()
    })
    .into_owned()
}

/// Splice slang and digit-word expansions into the token stream.
pub fn expand_slang(tokens: &[String], lex: &LexiconSet) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    for t in tokens {
        match lex.slang.get(t).or_else(|| lex.digit_words.get(t)) {
            Some(words) => out.extend(words.iter().cloned()),
            None => out.push(t.clone()),
        }
    }
    out
}

pub fn remove_stopwords(tokens: &[String], lex: &LexiconSet) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| !lex.stopwords.contains(t.as_str()))
        .cloned()
        .collect()
}
