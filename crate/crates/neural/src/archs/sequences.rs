//! Token documents to fixed-length id sequences.
//!
//! Id 0 is padding and id 1 stands for any token outside the vocabulary;
//! known tokens get ids from 2 in order of descending training frequency,
//! ties broken lexicographically.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{NeuralError, Result};

pub const PAD_ID: usize = 0;
pub const OOV_ID: usize = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabFile", into = "VocabFile")]
pub struct SequenceVocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    tokens: Vec<String>,
}

impl From<VocabFile> for SequenceVocab {
    fn from(f: VocabFile) -> Self {
        SequenceVocab::from_ranked(f.tokens)
    }
}

impl From<SequenceVocab> for VocabFile {
    fn from(v: SequenceVocab) -> Self {
        VocabFile { tokens: v.tokens }
    }
}

impl SequenceVocab {
    /// Tokens already in rank order; the first gets id 2.
    pub fn from_ranked(tokens: Vec<String>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i + 2)).collect();
        Self { tokens, index }
    }

    /// Ranks the tokens of `docs`. With `vocab_size = Some(n)` only the top
    /// `n - 2` tokens are kept so that ids stay below `n`.
    pub fn fit<S: AsRef<str>>(docs: &[Vec<S>], vocab_size: Option<usize>) -> Result<Self> {
        if vocab_size.is_some_and(|n| n < 3) {
            return Err(NeuralError::Config("vocab_size must be at least 3".into()));
        }
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for doc in docs {
            for t in doc {
                *counts.entry(t.as_ref()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        if let Some(n) = vocab_size {
            ranked.truncate(n - 2);
        }
        Ok(Self::from_ranked(ranked.into_iter().map(|(t, _)| t.to_string()).collect()))
    }

    /// Number of embedding rows needed: tokens plus padding and OOV.
    pub fn size(&self) -> usize {
        self.tokens.len() + 2
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(OOV_ID)
    }

    /// Post-padded with 0 and truncated after `max_len` ids.
    pub fn encode<S: AsRef<str>>(&self, doc: &[S], max_len: usize) -> Vec<usize> {
        let mut ids: Vec<usize> = doc.iter().take(max_len).map(|t| self.id(t.as_ref())).collect();
        ids.resize(max_len, PAD_ID);
        ids
    }
}

/// Encoded documents, row-major `[n, max_len]`, with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSet {
    pub max_len: usize,
    pub ids: Vec<usize>,
    pub labels: Vec<sentio_core::SentimentLabel>,
}

impl EncodedSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.ids[i * self.max_len..(i + 1) * self.max_len]
    }

    /// Ids and labels of the rows in `order`.
    pub fn gather(&self, order: &[usize]) -> (Vec<usize>, Vec<sentio_core::SentimentLabel>) {
        let mut ids = Vec::with_capacity(order.len() * self.max_len);
        for &i in order {
            ids.extend_from_slice(self.row(i));
        }
        (ids, order.iter().map(|&i| self.labels[i]).collect())
    }
}

/// Encodes every document of `docs` to `max_len` ids.
pub fn encode_sequences<S: AsRef<str>>(
    docs: &[Vec<S>],
    labels: &[sentio_core::SentimentLabel],
    vocab: &SequenceVocab,
    max_len: usize,
) -> Result<EncodedSet> {
    if max_len < 1 {
        return Err(NeuralError::Config("max_len must be at least 1".into()));
    }
    if docs.len() != labels.len() {
        return Err(NeuralError::Config(format!("{} documents but {} labels", docs.len(), labels.len())));
    }
    let mut ids = Vec::with_capacity(docs.len() * max_len);
    for d in docs {
        ids.extend(vocab.encode(d, max_len));
    }
    Ok(EncodedSet {
        max_len,
        ids,
        labels: labels.to_vec(),
    })
}
