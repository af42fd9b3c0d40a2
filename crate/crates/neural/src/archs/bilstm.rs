//! Recurrent classifier:
//!
//! ```text
//! Embedding(5000, 32) -> Conv1D(32, k=3, same, relu) -> MaxPool(2)
//! -> BiLSTM(32) -> Dropout(0.4) -> Dense(2, softmax)
//! ```
//!
//! The BiLSTM emits the final forward and backward hidden states
//! concatenated (`[b, 64]`). Trained with SGD (lr 0.1, momentum 0.8, decay
//! lr/epochs) on categorical cross-entropy for 20 epochs of batch 64.

use serde::{Deserialize, Serialize};
use sentio_core::rng::SplitMix64;
use sentio_core::SentimentLabel;

use super::model::{DropoutKey, Schedule, SequenceModel};
use crate::autodiff::loss::categorical_ce;
use crate::autodiff::lstm::{bilstm, bind_lstm, init_lstm};
use crate::autodiff::param::{glorot_uniform, uniform};
use crate::autodiff::{Optimizer, Padding, ParamSet, SgdMomentum, Tape, Tensor, Var};
use crate::error::{NeuralError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilstmSpec {
    pub vocab_size: Option<usize>,
    pub max_len: usize,
    pub embed_dim: usize,
    pub conv_filters: usize,
    pub kernel: usize,
    pub pool: usize,
    pub units: usize,
    pub dropout: f64,
    pub lr: f64,
    pub momentum: f64,
    /// `None` means `lr / epochs`.
    pub decay: Option<f64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: Option<usize>,
}

impl Default for BilstmSpec {
    fn default() -> Self {
        Self {
            vocab_size: Some(5000),
            max_len: 60,
            embed_dim: 32,
            conv_filters: 32,
            kernel: 3,
            pool: 2,
            units: 32,
            dropout: 0.4,
            lr: 0.1,
            momentum: 0.8,
            decay: None,
            epochs: 20,
            batch_size: 64,
            patience: None,
        }
    }
}

impl BilstmSpec {
    pub fn decay(&self) -> f64 {
        self.decay.unwrap_or(self.lr / self.epochs as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(NeuralError::Config(m.into()));
        if [self.embed_dim, self.conv_filters, self.kernel, self.pool, self.units].contains(&0) {
            return bad("bilstm embed_dim, conv_filters, kernel, pool and units must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) || !(0.0..1.0).contains(&self.momentum) {
            return bad("bilstm dropout and momentum must lie in [0, 1)");
        }
        if self.epochs == 0 || self.batch_size == 0 || !(self.lr > 0.0) || self.decay() < 0.0 {
            return bad("bilstm epochs, batch_size and lr must be positive and decay non-negative");
        }
        if self.max_len < self.pool {
            return bad("bilstm max_len must be at least the pool size");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BilstmModel {
    pub spec: BilstmSpec,
    params: ParamSet,
}

const CONV: usize = 1;
const FWD: usize = 3;
const BWD: usize = 6;
const OUT: usize = 9;

impl BilstmModel {
    pub fn new(spec: BilstmSpec, vocab_rows: usize, seed: u64) -> Result<Self> {
        spec.validate()?;
        if vocab_rows == 0 {
            return Err(NeuralError::Config("empty vocabulary".into()));
        }
        let mut rng = SplitMix64::new(seed);
        let mut params = ParamSet::new();
        let (e, f, k, h) = (spec.embed_dim, spec.conv_filters, spec.kernel, spec.units);
        params.push("embedding", uniform(&[vocab_rows, e], 0.05, &mut rng));
        params.push("conv.kernel", glorot_uniform(&[k, e, f], k * e, k * f, &mut rng));
        params.push("conv.bias", Tensor::zeros(&[f]));
        init_lstm(&mut params, "lstm_fwd", f, h, &mut rng);
        init_lstm(&mut params, "lstm_bwd", f, h, &mut rng);
        params.push("output.kernel", glorot_uniform(&[2 * h, 2], 2 * h, 2, &mut rng));
        params.push("output.bias", Tensor::zeros(&[2]));
        Ok(Self { spec, params })
    }

    pub fn from_params(spec: BilstmSpec, vocab_rows: usize, params: &ParamSet) -> Result<Self> {
        let mut m = Self::new(spec, vocab_rows, 0)?;
        m.params.assign(params)?;
        Ok(m)
    }
}

impl SequenceModel for BilstmModel {
    fn arch(&self) -> &'static str {
        "bilstm"
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
        Box::new(SgdMomentum::new(self.spec.lr, self.spec.momentum, self.spec.decay()))
    }

    fn forward<'t>(&self, _tape: &'t Tape, v: &[Var<'t>], ids: &[usize], dropout: Option<DropoutKey>) -> Result<Var<'t>> {
        let l = self.spec.max_len;
        if ids.is_empty() || ids.len() % l != 0 {
            return Err(NeuralError::shape("bilstm", format!("{} ids for rows of {l}", ids.len())));
        }
        let x = v[0].embedding(ids, &[ids.len() / l, l])?;
        let x = x.conv1d(v[CONV], v[CONV + 1], Padding::Same)?.relu().maxpool1d(self.spec.pool)?;
        let h = bilstm(x, &bind_lstm(v, FWD), &bind_lstm(v, BWD))?;
        let h = h.dropout(self.spec.dropout, dropout.map(|k| k.layer(0)))?;
        h.dense(v[OUT], v[OUT + 1])?.softmax()
    }

    fn loss<'t>(&self, probs: Var<'t>, labels: &[SentimentLabel]) -> Result<Var<'t>> {
        let onehot: Vec<f64> = labels
            .iter()
            .flat_map(|l| match l {
                SentimentLabel::Negative => [1.0, 0.0],
                SentimentLabel::Positive => [0.0, 1.0],
            })
            .collect();
        categorical_ce(probs, &onehot)
    }

    fn positive_scores(&self, probs: &Tensor) -> Vec<f64> {
        probs.data().chunks(2).map(|r| r[1]).collect()
    }

    /// Argmax of the two probabilities; a tie is Negative.
    fn decide(&self, probs: &Tensor) -> Vec<SentimentLabel> {
        probs
            .data()
            .chunks(2)
            .map(|r| if r[1] > r[0] { SentimentLabel::Positive } else { SentimentLabel::Negative })
            .collect()
    }

    fn spec_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.spec).expect("spec serialises")
    }
}
