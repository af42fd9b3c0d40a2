//! Multinomial naive Bayes with additive (Laplace) smoothing.
//!
//! Works on count or TF-IDF rows alike; TF-IDF weights are treated as
//! fractional counts. Equal class scores resolve to Negative.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::SentimentLabel;
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, SparseValue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub alpha: f64,
    /// Indexed by label code.
    pub log_prior: Vec<f64>,
    /// `log_likelihood[c][j] = ln P(feature j | class c)`.
    pub log_likelihood: Vec<Vec<f64>>,
    pub vocab_size: usize,
    /// Path or name of the vocabulary the columns refer to.
    #[serde(default)]
    pub vocab: Option<String>,
}

pub fn nb_fit<T: SparseValue>(features: &CsrMatrix<T>, labels: &[SentimentLabel], alpha: f64) -> Result<NbModel> {
    if features.rows() != labels.len() {
        return Err(Error::Dimension {
            expected: features.rows(),
            found: labels.len(),
        });
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("smoothing alpha must be positive, got {alpha}")));
    }
    let k = SentimentLabel::ALL.len();
    let w = features.cols();
    let mut docs = vec![0usize; k];
    let mut mass = vec![vec![0.0f64; w]; k];
    for (i, &label) in labels.iter().enumerate() {
        let c = label.code() as usize;
        docs[c] += 1;
        let (cols, vals) = features.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            mass[c][j] += v.to_f64();
        }
    }
    if let Some(c) = docs.iter().position(|&n| n == 0) {
        return Err(Error::invalid(format!(
            "class {} has no training documents",
            SentimentLabel::ALL[c].name()
        )));
    }
    let n = labels.len() as f64;
    let log_prior = docs.iter().map(|&d| (d as f64 / n).ln()).collect();
    let log_likelihood = mass
        .iter()
        .map(|row| {
            let denom = row.iter().sum::<f64>() + alpha * w as f64;
            row.iter().map(|&t| ((t + alpha) / denom).ln()).collect()
        })
        .collect();
    Ok(NbModel {
        alpha,
        log_prior,
        log_likelihood,
        vocab_size: w,
        vocab: None,
    })
}

impl NbModel {
    /// Unnormalised log posterior per class for one sparse row.
    pub fn scores<T: SparseValue>(&self, cols: &[usize], vals: &[T]) -> Result<Vec<f64>> {
        if let Some(&j) = cols.iter().find(|&&j| j >= self.vocab_size) {
            return Err(Error::Dimension {
                expected: self.vocab_size,
                found: j + 1,
            });
        }
        Ok(self
            .log_prior
            .iter()
            .zip(&self.log_likelihood)
            .map(|(&p, ll)| p + cols.iter().zip(vals).map(|(&j, &v)| v.to_f64() * ll[j]).sum::<f64>())
            .collect())
    }

    /// Predict one row; returns the label and per-class log posteriors.
    pub fn predict_row<T: SparseValue>(&self, cols: &[usize], vals: &[T]) -> Result<(SentimentLabel, Vec<f64>)> {
        let scores = self.scores(cols, vals)?;
        let mut best = 0;
        for (c, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = c;
            }
        }
        Ok((SentimentLabel::ALL[best], scores))
    }

    pub fn predict<T: SparseValue>(&self, features: &CsrMatrix<T>) -> Result<Vec<SentimentLabel>> {
        if features.cols() != self.vocab_size {
            return Err(Error::Dimension {
                expected: self.vocab_size,
                found: features.cols(),
            });
        }
        (0..features.rows())
            .map(|i| {
                let (c, v) = features.row(i);
                self.predict_row(c, v).map(|p| p.0)
            })
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let model: NbModel = serde_json::from_reader(std::io::BufReader::new(file))?;
        if model.log_prior.len() != SentimentLabel::ALL.len()
            || model.log_likelihood.len() != model.log_prior.len()
            || model.log_likelihood.iter().any(|r| r.len() != model.vocab_size)
        {
            return Err(Error::invalid(format!("{}: malformed model", path.display())));
        }
        Ok(model)
    }
}
