use std::path::Path;

use serde::{Deserialize, Serialize};
use sentio_core::evalreport::EpochRecord;
use sentio_core::rng::derive_seed;
use sentio_core::SentimentLabel;

use crate::autodiff::checkpoint::{load_checkpoint, save_checkpoint};
use crate::autodiff::{Optimizer, ParamSet, Tape, Tensor, Var};
use crate::error::{NeuralError, Result};

/// Identifies the dropout masks of one training batch. Each dropout layer
/// draws from `derive(seed, epoch, batch, layer)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DropoutKey {
    pub seed: u64,
    pub epoch: u64,
    pub batch: u64,
}

impl DropoutKey {
    pub fn layer(&self, layer: u64) -> u64 {
        derive_seed(derive_seed(derive_seed(self.seed, self.epoch), self.batch), layer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub epochs: usize,
    pub batch_size: usize,
    /// Early-stopping patience on validation accuracy; `None` trains for
    /// every epoch and keeps the final weights.
    pub patience: Option<usize>,
}

/// A classifier over fixed-length id sequences.
pub trait SequenceModel {
    fn arch(&self) -> &'static str;
    fn params(&self) -> &ParamSet;
    fn params_mut(&mut self) -> &mut ParamSet;
    fn max_len(&self) -> usize;
    fn schedule(&self) -> Schedule;
    fn optimizer(&self) -> Box<dyn Optimizer>;

    /// Class probabilities for `ids` (`[b * max_len]`); `vars` are the bound
    /// parameters. Dropout is active only when `dropout` is given.
    fn forward<'t>(&self, tape: &'t Tape, vars: &[Var<'t>], ids: &[usize], dropout: Option<DropoutKey>) -> Result<Var<'t>>;

    fn loss<'t>(&self, probs: Var<'t>, labels: &[SentimentLabel]) -> Result<Var<'t>>;

    /// Positive-class probability per row of a `forward` output.
    fn positive_scores(&self, probs: &Tensor) -> Vec<f64>;

    fn decide(&self, probs: &Tensor) -> Vec<SentimentLabel>;

    /// The architecture hyperparameters as JSON, stored in checkpoints.
    fn spec_json(&self) -> serde_json::Value;
}

/// Loss of one batch under the current parameters.
pub fn batch_loss(model: &dyn SequenceModel, ids: &[usize], labels: &[SentimentLabel], dropout: Option<DropoutKey>) -> Result<f64> {
    let tape = Tape::new();
    let vars = model.params().bind(&tape);
    let probs = model.forward(&tape, &vars, ids, dropout)?;
    Ok(model.loss(probs, labels)?.item())
}

/// Evaluation-mode probabilities for a whole id matrix, `batch_size` rows
/// at a time.
pub fn probabilities(model: &dyn SequenceModel, ids: &[usize], batch_size: usize) -> Result<Vec<Tensor>> {
    let l = model.max_len();
    if l == 0 || ids.len() % l != 0 {
        return Err(NeuralError::shape("predict", format!("{} ids for rows of {l}", ids.len())));
    }
    let rows = batch_size.max(1) * l;
    ids.chunks(rows)
        .map(|chunk| {
            let tape = Tape::new();
            let vars = model.params().bind(&tape);
            let p = model.forward(&tape, &vars, chunk, None)?;
            let v = p.value().clone();
            Ok(v)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictions {
    pub labels: Vec<SentimentLabel>,
    /// Probability of the positive class.
    pub scores: Vec<f64>,
}

pub fn predict(model: &dyn SequenceModel, ids: &[usize], batch_size: usize) -> Result<Predictions> {
    let mut out = Predictions {
        labels: Vec::new(),
        scores: Vec::new(),
    };
    for p in probabilities(model, ids, batch_size)? {
        out.labels.extend(model.decide(&p));
        out.scores.extend(model.positive_scores(&p));
    }
    Ok(out)
}

/// Metadata stored beside checkpoint tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub arch: String,
    pub spec: serde_json::Value,
    pub vocab_rows: usize,
    pub seed: u64,
    pub epoch: Option<usize>,
    pub metrics: Option<EpochRecord>,
}

pub fn save_model(
    path: &Path,
    model: &dyn SequenceModel,
    vocab_rows: usize,
    seed: u64,
    last: Option<&EpochRecord>,
) -> Result<()> {
    let meta = CheckpointMeta {
        arch: model.arch().to_string(),
        spec: model.spec_json(),
        vocab_rows,
        seed,
        epoch: last.map(|r| r.epoch),
        metrics: last.cloned(),
    };
    save_checkpoint(path, model.params(), &meta)
}

/// Reads a checkpoint and checks its architecture name.
pub fn read_model(path: &Path, arch: &str) -> Result<(ParamSet, CheckpointMeta)> {
    let (params, meta): (ParamSet, CheckpointMeta) = load_checkpoint(path)?;
    if meta.arch != arch {
        return Err(NeuralError::Checkpoint {
            path: path.to_path_buf(),
            message: format!("holds a {} model, expected {arch}", meta.arch),
        });
    }
    Ok((params, meta))
}
