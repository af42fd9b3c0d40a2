//! WordPiece tokenisation and fixed-length input encoding for uncased BERT
//! style models, plus the piece-count filter used to drop non-English
//! tweets.
//!
//! Text is pre-tokenised by lowercasing, stripping accents and splitting on
//! whitespace and punctuation (every punctuation character is its own word).
//! Each word is then split greedily, longest vocabulary match first, with
//! continuation pieces prefixed by `##`. Words longer than 100 characters or
//! without a full decomposition become `[UNK]`.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_categories::UnicodeCategories;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::tensorfile::{write_tensors, NamedTensor};

pub const PAD: &str = "[PAD]";
pub const UNK: &str = "[UNK]";
pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";
pub const MAX_WORD_CHARS: usize = 100;

#[derive(Debug, Clone)]
pub struct WordPieceVocab {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    pub pad: u32,
    pub unk: u32,
    pub cls: u32,
    pub sep: u32,
}

impl WordPieceVocab {
    /// Build from tokens in id order.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        let mut ids = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if ids.insert(t.clone(), i as u32).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary token {t:?}")));
            }
        }
        let special = |s: &str| {
            ids.get(s)
                .copied()
                .ok_or_else(|| Error::invalid(format!("vocabulary is missing {s}")))
        };
        Ok(Self {
            pad: special(PAD)?,
            unk: special(UNK)?,
            cls: special(CLS)?,
            sep: special(SEP)?,
            tokens,
            ids,
        })
    }

    /// One token per line; the id is the 0-based line number.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tokens(text.lines().map(|l| l.trim_end_matches('\r')))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || c.is_punctuation()
}

/// Lowercase, strip accents, split on whitespace and punctuation.
pub fn basic_tokenize(text: &str) -> Vec<String> {
    let folded: String = text
        .to_lowercase()
        .nfd()
        .filter(|c| !c.is_mark_nonspacing() && !c.is_control() || c.is_whitespace())
        .collect();
    let mut words = Vec::new();
    let mut cur = String::new();
    for c in folded.chars() {
        if c.is_whitespace() || is_punct(c) {
            if !cur.is_empty() {
                words.push(std::mem::take(&mut cur));
            }
            if !c.is_whitespace() {
                words.push(c.to_string());
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        words.push(cur);
    }
    words
}

/// Greedy longest-match-first split of a single word.
pub fn wordpiece_word(word: &str, vocab: &WordPieceVocab) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() > MAX_WORD_CHARS {
        return vec![UNK.to_string()];
    }
    let mut pieces = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let mut end = chars.len();
        let mut found = None;
        while end > start {
            let mut piece: String = chars[start..end].iter().collect();
            if start > 0 {
                piece.insert_str(0, "##");
            }
            if vocab.id(&piece).is_some() {
                found = Some(piece);
                break;
            }
            end -= 1;
        }
        match found {
            Some(p) => pieces.push(p),
            None => return vec![UNK.to_string()],
        }
        start = end;
    }
    pieces
}

pub fn wordpiece_tokenize(text: &str, vocab: &WordPieceVocab) -> Vec<String> {
    basic_tokenize(text)
        .iter()
        .flat_map(|w| wordpiece_word(w, vocab))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoding {
    #[serde(rename = "ids")]
    pub input_ids: Vec<u32>,
    #[serde(rename = "mask")]
    pub attention_mask: Vec<u8>,
    pub type_ids: Vec<u8>,
    #[serde(skip)]
    pub real_length: usize,
}

/// `[CLS] pieces [SEP]`, truncated and padded to `max_len`.
pub fn encode(text: &str, vocab: &WordPieceVocab, max_len: usize) -> Result<Encoding> {
    if max_len < 2 {
        return Err(Error::invalid(format!("max_len must be at least 2, got {max_len}")));
    }
    let pieces = wordpiece_tokenize(text, vocab);
    let mut ids = Vec::with_capacity(max_len);
    ids.push(vocab.cls);
    ids.extend(
        pieces
            .iter()
            .take(max_len - 2)
            .map(|p| vocab.id(p).unwrap_or(vocab.unk)),
    );
    ids.push(vocab.sep);
    let real_length = ids.len();
    ids.resize(max_len, vocab.pad);
    let mut mask = vec![1u8; real_length];
    mask.resize(max_len, 0);
    Ok(Encoding {
        input_ids: ids,
        attention_mask: mask,
        type_ids: vec![0; max_len],
        real_length,
    })
}

pub fn encode_batch<S: AsRef<str> + Sync>(
    texts: &[S],
    vocab: &WordPieceVocab,
    max_len: usize,
) -> Result<Vec<Encoding>> {
    texts.par_iter().map(|t| encode(t.as_ref(), vocab, max_len)).collect()
}

/// JSON lines, one `{ids, mask, type_ids}` object per encoding.
pub fn write_jsonl<W: Write>(mut w: W, encodings: &[Encoding]) -> Result<()> {
    for e in encodings {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")
            .map_err(|e| Error::invalid(format!("writing encodings: {e}")))?;
    }
    Ok(())
}

/// Stack encodings into `[n, max_len]` integer tensors `input_ids`,
/// `attention_mask` and `token_type_ids`.
pub fn write_tensor_file<W: Write>(w: W, encodings: &[Encoding]) -> Result<()> {
    let n = encodings.len();
    let len = encodings.first().map_or(0, |e| e.input_ids.len());
    if let Some(e) = encodings.iter().find(|e| e.input_ids.len() != len) {
        return Err(Error::Dimension {
            expected: len,
            found: e.input_ids.len(),
        });
    }
    let collect = |f: &dyn Fn(&Encoding) -> Vec<i64>| encodings.iter().flat_map(f).collect::<Vec<i64>>();
    write_tensors(
        w,
        &[
            NamedTensor::i64("input_ids", vec![n, len], collect(&|e| e.input_ids.iter().map(|&x| x as i64).collect())),
            NamedTensor::i64(
                "attention_mask",
                vec![n, len],
                collect(&|e| e.attention_mask.iter().map(|&x| x as i64).collect()),
            ),
            NamedTensor::i64("token_type_ids", vec![n, len], collect(&|e| e.type_ids.iter().map(|&x| x as i64).collect())),
        ],
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedText {
    pub index: usize,
    pub pieces: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct LengthFilter {
    pub kept: Vec<usize>,
    pub dropped: Vec<DroppedText>,
}

/// Flag texts whose WordPiece count (without `[CLS]`/`[SEP]`) exceeds
/// `threshold`.
pub fn token_length_filter<S: AsRef<str> + Sync>(texts: &[S], vocab: &WordPieceVocab, threshold: usize) -> LengthFilter {
    let counts: Vec<usize> = texts
        .par_iter()
        .map(|t| wordpiece_tokenize(t.as_ref(), vocab).len())
        .collect();
    let mut out = LengthFilter::default();
    for (i, n) in counts.into_iter().enumerate() {
        if n > threshold {
            out.dropped.push(DroppedText {
                index: i,
                pieces: n,
                text: texts[i].as_ref().to_string(),
            });
        } else {
            out.kept.push(i);
        }
    }
    out
}
