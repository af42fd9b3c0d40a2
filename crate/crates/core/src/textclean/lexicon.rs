//! Lexicon files and their in-memory form.
//!
//! A lexicon directory holds:
//!
//! | file                   | format                                  |
//! |------------------------|-----------------------------------------|
//! | `contractions.csv`     | `key,value`                             |
//! | `slang.csv`            | `key,value`                             |
//! | `digit_words.csv`      | `key,value`                             |
//! | `stopwords.txt`        | one token per line                      |
//! | `emoji.csv`            | `codepoints,token` (space-separated hex)|
//! | `lemma_rules.csv`      | `suffix,replacement,min_stem,verb`      |
//! | `lemma_exceptions.csv` | `key,value`                             |
//! | `phonetic.csv`         | `kind,pattern,value`                    |
//!
//! The default set is compiled in from `data/lexicons`.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use regex::Regex;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaRule {
    pub suffix: String,
    pub replacement: String,
    pub min_stem: usize,
    /// Apply consonant undoubling / silent-e restoration to the stem, and
    /// require the stem to contain a vowel.
    pub verb: bool,
}

/// What a letter contributes to a phonetic key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhoneticClass {
    Digit(u8),
    /// Not emitted, but separates equal codes on either side.
    Separator,
    /// Not emitted and transparent to code merging.
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhoneticRules {
    pub rewrites: Vec<(String, String)>,
    pub classes: HashMap<char, PhoneticClass>,
}

#[derive(Debug, Clone)]
pub struct LexiconSet {
    pub contractions: HashMap<String, String>,
    pub slang: HashMap<String, Vec<String>>,
    pub digit_words: HashMap<String, Vec<String>>,
    pub stopwords: HashSet<String>,
    /// Codepoint sequence → placeholder token such as `<smile>`.
    pub emoji: HashMap<Vec<char>, String>,
    pub emoji_max_len: usize,
    pub lemma_rules: Vec<LemmaRule>,
    pub lemma_exceptions: HashMap<String, String>,
    pub phonetic: PhoneticRules,
}

struct Sources<'a> {
    contractions: &'a str,
    slang: &'a str,
    digit_words: &'a str,
    stopwords: &'a str,
    emoji: &'a str,
    lemma_rules: &'a str,
    lemma_exceptions: &'a str,
    phonetic: &'a str,
}

const FILES: [&str; 8] = [
    "contractions.csv",
    "slang.csv",
    "digit_words.csv",
    "stopwords.txt",
    "emoji.csv",
    "lemma_rules.csv",
    "lemma_exceptions.csv",
    "phonetic.csv",
];

fn lex_err(name: &str, message: impl Into<String>) -> Error {
    Error::Lexicon {
        name: name.to_string(),
        message: message.into(),
    }
}

fn csv_rows(name: &str, text: &str, width: usize) -> Result<Vec<Vec<String>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| lex_err(name, e.to_string()))?;
        if rec.len() != width {
            return Err(lex_err(
                name,
                format!("row {}: expected {width} columns, found {}", i + 2, rec.len()),
            ));
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

fn key_value_map(name: &str, text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for row in csv_rows(name, text, 2)? {
        let (k, v) = (row[0].trim().to_string(), row[1].trim().to_string());
        if k.is_empty() || k != k.to_lowercase() {
            return Err(lex_err(name, format!("key {k:?} must be non-empty lowercase")));
        }
        if k == v {
            return Err(lex_err(name, format!("key {k:?} maps to itself")));
        }
        if map.insert(k.clone(), v).is_some() {
            return Err(lex_err(name, format!("duplicate key {k:?}")));
        }
    }
    Ok(map)
}

fn word_expansions(name: &str, text: &str) -> Result<HashMap<String, Vec<String>>> {
    let map = key_value_map(name, text)?;
    let mut out = HashMap::with_capacity(map.len());
    for (k, v) in map {
        let words: Vec<String> = v.split_whitespace().map(str::to_string).collect();
        if words.is_empty()
            || words
                .iter()
                .any(|w| !w.chars().all(|c| c.is_ascii_lowercase()))
        {
            return Err(lex_err(name, format!("expansion of {k:?} must be lowercase words")));
        }
        out.insert(k, words);
    }
    Ok(out)
}

impl LexiconSet {
    /// The lexicons shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_sources(Sources {
            contractions: include_str!("../../data/lexicons/contractions.csv"),
            slang: include_str!("../../data/lexicons/slang.csv"),
            digit_words: include_str!("../../data/lexicons/digit_words.csv"),
            stopwords: include_str!("../../data/lexicons/stopwords.txt"),
            emoji: include_str!("../../data/lexicons/emoji.csv"),
            lemma_rules: include_str!("../../data/lexicons/lemma_rules.csv"),
            lemma_exceptions: include_str!("../../data/lexicons/lemma_exceptions.csv"),
            phonetic: include_str!("../../data/lexicons/phonetic.csv"),
        })
        .expect("bundled lexicons are valid")
    }

    /// Load every lexicon file from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut texts = Vec::with_capacity(FILES.len());
        for f in FILES {
            let p = dir.join(f);
            texts.push(std::fs::read_to_string(&p).map_err(|e| Error::io(p, e))?);
        }
        Self::from_sources(Sources {
            contractions: &texts[0],
            slang: &texts[1],
            digit_words: &texts[2],
            stopwords: &texts[3],
            emoji: &texts[4],
            lemma_rules: &texts[5],
            lemma_exceptions: &texts[6],
            phonetic: &texts[7],
        })
    }

    fn from_sources(src: Sources<'_>) -> Result<Self> {
        let contractions = key_value_map("contractions", src.contractions)?;
        let slang = word_expansions("slang", src.slang)?;
        let digit_words = word_expansions("digit_words", src.digit_words)?;

        let mut stopwords = HashSet::new();
        for line in src.stopwords.lines() {
            let w = line.trim();
            if w.is_empty() {
                continue;
            }
            if w != w.to_lowercase() {
                return Err(lex_err("stopwords", format!("{w:?} is not lowercase")));
            }
            stopwords.insert(w.to_string());
        }

        let token_re = Regex::new(r"^<[a-z_]+>$").unwrap();
        let mut emoji = HashMap::new();
        for row in csv_rows("emoji", src.emoji, 2)? {
            let token = row[1].trim().to_string();
            if !token_re.is_match(&token) {
                return Err(lex_err("emoji", format!("token {token:?} must look like <name>")));
            }
            let seq = row[0]
                .split_whitespace()
                .map(|h| {
                    u32::from_str_radix(h, 16)
                        .ok()
                        .and_then(char::from_u32)
                        .ok_or_else(|| lex_err("emoji", format!("bad codepoint {h:?}")))
                })
                .collect::<Result<Vec<char>>>()?;
            if seq.is_empty() {
                return Err(lex_err("emoji", "empty codepoint sequence"));
            }
            emoji.insert(seq, token);
        }
        let emoji_max_len = emoji.keys().map(Vec::len).max().unwrap_or(0);

        let mut lemma_rules = Vec::new();
        for row in csv_rows("lemma_rules", src.lemma_rules, 4)? {
            let min_stem = row[2]
                .trim()
                .parse()
                .map_err(|_| lex_err("lemma_rules", format!("bad min_stem {:?}", row[2])))?;
            let verb = match row[3].trim() {
                "yes" => true,
                "no" => false,
                other => return Err(lex_err("lemma_rules", format!("bad verb flag {other:?}"))),
            };
            lemma_rules.push(LemmaRule {
                suffix: row[0].trim().to_string(),
                replacement: row[1].trim().to_string(),
                min_stem,
                verb,
            });
        }
        let lemma_exceptions = key_value_map("lemma_exceptions", src.lemma_exceptions)?;

        let mut rewrites = Vec::new();
        let mut classes = HashMap::new();
        for row in csv_rows("phonetic", src.phonetic, 3)? {
            let (kind, pattern, value) = (row[0].trim(), row[1].trim(), row[2].trim());
            match kind {
                "rewrite" => rewrites.push((pattern.to_string(), value.to_string())),
                "class" => {
                    let class = match value {
                        "0" => PhoneticClass::Separator,
                        "skip" => PhoneticClass::Skip,
                        d => match d.parse::<u8>() {
                            Ok(n @ 1..=9) => PhoneticClass::Digit(n),
                            _ => return Err(lex_err("phonetic", format!("bad class {d:?}"))),
                        },
                    };
                    for c in pattern.chars() {
                        classes.insert(c, class);
                    }
                }
                other => return Err(lex_err("phonetic", format!("unknown row kind {other:?}"))),
            }
        }

        let lex = LexiconSet {
            contractions,
            slang,
            digit_words,
            stopwords,
            emoji,
            emoji_max_len,
            lemma_rules,
            lemma_exceptions,
            phonetic: PhoneticRules { rewrites, classes },
        };
        lex.check_expansions()?;
        Ok(lex)
    }

    /// Expansions must not themselves be expandable, or a second cleaning
    /// pass would change them again.
    fn check_expansions(&self) -> Result<()> {
        for (name, map) in [("slang", &self.slang), ("digit_words", &self.digit_words)] {
            for (k, words) in map {
                if let Some(w) = words.iter().find(|w| self.is_expandable(w)) {
                    return Err(lex_err(name, format!("expansion of {k:?} contains {w:?}")));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn is_expandable(&self, token: &str) -> bool {
        self.slang.contains_key(token) || self.digit_words.contains_key(token)
    }

    pub(crate) fn placeholder_tokens(&self) -> HashSet<String> {
        let mut set: HashSet<String> = self.emoji.values().cloned().collect();
        set.insert("<url>".into());
        set.insert("<user>".into());
        set
    }
}
