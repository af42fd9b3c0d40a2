//! Vocabulary fitting and document-term features.
//!
//! Counts are raw occurrence counts `n_ij`. Term frequency normalises each
//! row by its total count. Inverse document frequency is `ln(N / DF_j)` with
//! the natural logarithm and no smoothing, so a feature present in every
//! document gets weight 0 and its TF-IDF entries are not stored.

use std::collections::HashMap;
use std::path::Path;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, SparseCountMatrix, TfidfMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    /// Feature string to column id; iteration order is id order.
    pub index: IndexMap<String, usize>,
    pub df: Vec<u64>,
    pub ngram_range: (usize, usize),
    pub doc_count: u64,
}

/// All contiguous n-grams of `tokens` for `n` in `range`, joined by a single
/// space, shortest first.
pub fn ngrams<S: AsRef<str>>(tokens: &[S], range: (usize, usize)) -> Vec<String> {
    let mut out = Vec::new();
    for n in range.0..=range.1 {
        if n == 0 || n > tokens.len() {
            continue;
        }
        for w in tokens.windows(n) {
            let parts: Vec<&str> = w.iter().map(|t| t.as_ref()).collect();
            out.push(parts.join(" "));
        }
    }
    out
}

fn check_range(range: (usize, usize)) -> Result<()> {
    if range.0 == 0 || range.0 > range.1 {
        return Err(Error::invalid(format!("bad n-gram range {range:?}")));
    }
    Ok(())
}

/// Fit a vocabulary over cleaned token lists. With `max_features`, only the
/// most frequent features are kept (ties broken lexicographically). Column
/// ids follow lexicographic order of the kept features.
pub fn fit_vocab<S: AsRef<str>>(
    docs: &[Vec<S>],
    ngram_range: (usize, usize),
    max_features: Option<usize>,
) -> Result<Vocabulary> {
    check_range(ngram_range)?;
    if docs.is_empty() {
        return Err(Error::invalid("cannot fit a vocabulary on an empty corpus"));
    }
    let mut freq: HashMap<String, (u64, u64)> = HashMap::new();
    for doc in docs {
        let mut grams = ngrams(doc, ngram_range);
        for g in &grams {
            freq.entry(g.clone()).or_default().0 += 1;
        }
        grams.sort_unstable();
        grams.dedup();
        for g in grams {
            freq.get_mut(&g).expect("counted above").1 += 1;
        }
    }
    if freq.is_empty() {
        return Err(Error::invalid("corpus has no features"));
    }
    let mut feats: Vec<(String, u64, u64)> = freq.into_iter().map(|(k, (f, d))| (k, f, d)).collect();
    if let Some(k) = max_features {
        feats.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        feats.truncate(k);
    }
    feats.sort_by(|a, b| a.0.cmp(&b.0));
    let df = feats.iter().map(|f| f.2).collect();
    let index = feats.into_iter().enumerate().map(|(i, f)| (f.0, i)).collect();
    Ok(Vocabulary {
        index,
        df,
        ngram_range,
        doc_count: docs.len() as u64,
    })
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn id(&self, feature: &str) -> Option<usize> {
        self.index.get(feature).copied()
    }

    pub fn feature(&self, id: usize) -> Option<&str> {
        self.index.get_index(id).map(|(k, _)| k.as_str())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let vocab: Vocabulary = serde_json::from_reader(std::io::BufReader::new(file))?;
        if vocab.df.len() != vocab.index.len()
            || vocab.index.values().enumerate().any(|(i, &id)| i != id)
        {
            return Err(Error::invalid(format!("{}: malformed vocabulary", path.display())));
        }
        Ok(vocab)
    }
}

fn count_row<S: AsRef<str>>(doc: &[S], vocab: &Vocabulary) -> Vec<(usize, u32)> {
    let mut counts: HashMap<usize, u32> = HashMap::new();
    for g in ngrams(doc, vocab.ngram_range) {
        if let Some(j) = vocab.id(&g) {
            *counts.entry(j).or_default() += 1;
        }
    }
    let mut row: Vec<(usize, u32)> = counts.into_iter().collect();
    row.sort_unstable();
    row
}

/// `x_ij = n_ij`; features outside the vocabulary are ignored.
pub fn count_transform<S: AsRef<str> + Sync>(docs: &[Vec<S>], vocab: &Vocabulary) -> SparseCountMatrix {
    let rows: Vec<_> = docs.par_iter().map(|d| count_row(d, vocab)).collect();
    CsrMatrix::from_rows(vocab.len(), rows).expect("rows built from vocabulary ids")
}

/// `TF_ij = n_ij / sum_k n_ik`.
pub fn term_frequency(counts: &SparseCountMatrix) -> TfidfMatrix {
    let totals: Vec<f64> = (0..counts.rows())
        .map(|i| counts.row(i).1.iter().map(|&v| v as f64).sum())
        .collect();
    counts.map(|i, _, v| v as f64 / totals[i])
}

/// `IDF_j = ln(N / DF_j)`.
pub fn inverse_document_frequency(vocab: &Vocabulary) -> Vec<f64> {
    let n = vocab.doc_count as f64;
    vocab.df.iter().map(|&df| (n / df as f64).ln()).collect()
}

/// `TFIDF_ij = TF_ij * IDF_j`.
pub fn tfidf_transform(counts: &SparseCountMatrix, vocab: &Vocabulary) -> Result<TfidfMatrix> {
    if counts.cols() != vocab.len() {
        return Err(Error::Dimension {
            expected: vocab.len(),
            found: counts.cols(),
        });
    }
    let idf = inverse_document_frequency(vocab);
    Ok(term_frequency(counts).map(|_, j, tf| tf * idf[j]))
}
