//! Convolutional classifier:
//!
//! ```text
//! Embedding(vocab, 300)
//! [Conv1D(f, k=4, valid, relu) -> MaxPool(2) -> Dropout(0.1)] for f in (32, 64, 64)
//! Flatten -> Dense(256, relu) -> Dense(1, sigmoid)
//! ```
//!
//! Trained with Adam (lr 0.01) on label-smoothed binary cross-entropy, batch
//! 64, early stopping on validation accuracy with patience 2.

use serde::{Deserialize, Serialize};
use sentio_core::rng::SplitMix64;
use sentio_core::SentimentLabel;

use super::model::{DropoutKey, Schedule, SequenceModel};
use crate::autodiff::loss::bce_label_smoothed;
use crate::autodiff::param::{glorot_uniform, uniform};
use crate::autodiff::{Adam, Optimizer, Padding, ParamSet, Tape, Tensor, Var};
use crate::error::{NeuralError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CnnSpec {
    /// Cap on the sequence vocabulary (including padding and OOV); `None`
    /// keeps every training token.
    pub vocab_size: Option<usize>,
    pub max_len: usize,
    pub embed_dim: usize,
    pub filters: Vec<usize>,
    pub kernel: usize,
    pub pool: usize,
    pub dropout: f64,
    pub dense: usize,
    pub lr: f64,
    pub label_smoothing: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: Option<usize>,
}

impl Default for CnnSpec {
    fn default() -> Self {
        Self {
            vocab_size: None,
            max_len: 60,
            embed_dim: 300,
            filters: vec![32, 64, 64],
            kernel: 4,
            pool: 2,
            dropout: 0.1,
            dense: 256,
            lr: 0.01,
            label_smoothing: 0.1,
            epochs: 20,
            batch_size: 64,
            patience: Some(2),
        }
    }
}

impl CnnSpec {
    /// Sequence lengths `[input, conv1, pool1, conv2, pool2, ...]`, or `None`
    /// when some stage would be empty.
    pub fn lengths(&self, max_len: usize) -> Option<Vec<usize>> {
        let mut out = vec![max_len];
        let mut l = max_len;
        for _ in &self.filters {
            l = Padding::Valid.output_len(l, self.kernel).filter(|&n| n > 0)?;
            out.push(l);
            l /= self.pool;
            if l == 0 {
                return None;
            }
            out.push(l);
        }
        Some(out)
    }

    /// Shortest input that survives every conv/pool stage.
    pub fn min_len(&self) -> usize {
        // each stage needs (k - 1) + pool * next, from a final length of 1
        self.filters
            .iter()
            .fold(1, |need, _| need * self.pool + self.kernel - 1)
    }

    /// Width of the flattened feature vector for `max_len`.
    pub fn flatten_dim(&self, max_len: usize) -> Option<usize> {
        let l = *self.lengths(max_len)?.last()?;
        Some(l * self.filters.last().copied().unwrap_or(self.embed_dim))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NeuralError::Config(m));
        if self.filters.is_empty() || self.filters.contains(&0) {
            return bad("cnn filters must be non-empty and positive".into());
        }
        if self.kernel == 0 || self.pool == 0 || self.embed_dim == 0 || self.dense == 0 {
            return bad("cnn kernel, pool, embed_dim and dense must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) || !(0.0..1.0).contains(&self.label_smoothing) {
            return bad("cnn dropout and label_smoothing must lie in [0, 1)".into());
        }
        if self.epochs == 0 || self.batch_size == 0 || !(self.lr > 0.0) {
            return bad("cnn epochs, batch_size and lr must be positive".into());
        }
        if self.max_len < self.min_len() {
            return bad(format!(
                "cnn max_len {} is shorter than the minimum {} for {} conv/pool stages",
                self.max_len,
                self.min_len(),
                self.filters.len()
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CnnModel {
    pub spec: CnnSpec,
    params: ParamSet,
}

impl CnnModel {
    /// Seeded initialisation: uniform(±0.05) embeddings, Glorot-uniform
    /// kernels, zero biases.
    pub fn new(spec: CnnSpec, vocab_rows: usize, seed: u64) -> Result<Self> {
        spec.validate()?;
        if vocab_rows == 0 {
            return Err(NeuralError::Config("empty vocabulary".into()));
        }
        let mut rng = SplitMix64::new(seed);
        let mut params = ParamSet::new();
        params.push("embedding", uniform(&[vocab_rows, spec.embed_dim], 0.05, &mut rng));
        let mut cin = spec.embed_dim;
        for (s, &f) in spec.filters.iter().enumerate() {
            let k = spec.kernel;
            params.push(format!("conv{s}.kernel"), glorot_uniform(&[k, cin, f], k * cin, k * f, &mut rng));
            params.push(format!("conv{s}.bias"), Tensor::zeros(&[f]));
            cin = f;
        }
        let flat = spec.flatten_dim(spec.max_len).expect("validated length");
        params.push("dense.kernel", glorot_uniform(&[flat, spec.dense], flat, spec.dense, &mut rng));
        params.push("dense.bias", Tensor::zeros(&[spec.dense]));
        params.push("output.kernel", glorot_uniform(&[spec.dense, 1], spec.dense, 1, &mut rng));
        params.push("output.bias", Tensor::zeros(&[1]));
        Ok(Self { spec, params })
    }

    /// Wraps loaded parameters after checking them against a fresh model.
    pub fn from_params(spec: CnnSpec, vocab_rows: usize, params: &ParamSet) -> Result<Self> {
        let mut m = Self::new(spec, vocab_rows, 0)?;
        m.params.assign(params)?;
        Ok(m)
    }
}

impl SequenceModel for CnnModel {
    fn arch(&self) -> &'static str {
        "cnn"
    }

    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn max_len(&self) -> usize {
        self.spec.max_len
    }

    fn schedule(&self) -> Schedule {
        Schedule {
            epochs: self.spec.epochs,
            batch_size: self.spec.batch_size,
            patience: self.spec.patience,
        }
    }

    fn optimizer(&self) -> Box<dyn Optimizer> {
        Box::new(Adam::new(self.spec.lr))
    }

    fn forward<'t>(&self, _tape: &'t Tape, v: &[Var<'t>], ids: &[usize], dropout: Option<DropoutKey>) -> Result<Var<'t>> {
        let l = self.spec.max_len;
        if ids.is_empty() || ids.len() % l != 0 {
            return Err(NeuralError::shape("cnn", format!("{} ids for rows of {l}", ids.len())));
        }
        let mut x = v[0].embedding(ids, &[ids.len() / l, l])?;
        for s in 0..self.spec.filters.len() {
            x = x.conv1d(v[1 + 2 * s], v[2 + 2 * s], Padding::Valid)?.relu();
            x = x.maxpool1d(self.spec.pool)?;
            x = x.dropout(self.spec.dropout, dropout.map(|k| k.layer(s as u64)))?;
        }
        let n = 1 + 2 * self.spec.filters.len();
        let h = x.flatten()?.dense(v[n], v[n + 1])?.relu();
        Ok(h.dense(v[n + 2], v[n + 3])?.sigmoid())
    }

    fn loss<'t>(&self, probs: Var<'t>, labels: &[SentimentLabel]) -> Result<Var<'t>> {
        let y: Vec<f64> = labels.iter().map(|l| l.code() as f64).collect();
        bce_label_smoothed(probs, &y, self.spec.label_smoothing)
    }

    fn positive_scores(&self, probs: &Tensor) -> Vec<f64> {
        probs.data().to_vec()
    }

    /// Positive when the sigmoid output is at least 0.5.
    fn decide(&self, probs: &Tensor) -> Vec<SentimentLabel> {
        probs
            .data()
            .iter()
            .map(|&p| if p >= 0.5 { SentimentLabel::Positive } else { SentimentLabel::Negative })
            .collect()
    }

    fn spec_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.spec).expect("spec serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_lengths() {
        let spec = CnnSpec::default();
        let closed = |mut l: usize| {
            let mut out = vec![l];
            for _ in 0..3 {
                l -= 3;
                out.push(l);
                l /= 2;
                out.push(l);
            }
            out
        };
        for l in [32, 60, 128] {
            assert_eq!(spec.lengths(l).unwrap(), closed(l));
        }
        assert_eq!(spec.lengths(60).unwrap(), [60, 57, 28, 25, 12, 9, 4]);
        assert_eq!(spec.flatten_dim(60), Some(256));
    }

    #[test]
    fn minimum_length() {
        let spec = CnnSpec::default();
        assert_eq!(spec.min_len(), 29);
        assert!(spec.lengths(29).is_some());
        assert!(spec.lengths(28).is_none());
        let short = CnnSpec { max_len: 28, ..CnnSpec::default() };
        assert!(CnnModel::new(short, 10, 0).is_err());
    }

    #[test]
    fn embedding_parameter_count() {
        let m = CnnModel::new(CnnSpec::default(), 1234, 1).unwrap();
        assert_eq!(m.params().get(0).value.len(), 1234 * 300);
        assert_eq!(m.params().by_name("dense.kernel").unwrap().value.shape(), [256, 256]);
    }

    #[test]
    fn decision_boundary() {
        let m = CnnModel::new(CnnSpec::default(), 5, 1).unwrap();
        let p = Tensor::new(vec![3, 1], vec![0.5, 0.4999999, 0.9]).unwrap();
        assert_eq!(m.decide(&p), [SentimentLabel::Positive, SentimentLabel::Negative, SentimentLabel::Positive]);
    }
}
