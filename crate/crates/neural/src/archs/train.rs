//! Mini-batch training loop shared by both architectures.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sentio_core::evalreport::{EpochRecord, LearningCurve};
use sentio_core::rng::SplitMix64;

use super::model::{probabilities, DropoutKey, SequenceModel};
use super::sequences::EncodedSet;
use crate::autodiff::{EarlyStopping, StopDecision, Tape};
use crate::error::{NeuralError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRun {
    pub model: String,
    pub seed: u64,
    pub epochs: Vec<EpochRecord>,
    /// Epoch at which early stopping fired.
    pub stopped_epoch: Option<usize>,
    /// Epoch with the best monitored accuracy (validation when available).
    pub best_epoch: usize,
    /// Whether the best epoch's weights were restored at the end.
    pub restored_best: bool,
    /// Loss of the very first batch, before any update.
    pub first_batch_loss: f64,
    /// Not serialised, so histories of identical runs compare byte-equal.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl TrainRun {
    pub fn curve(&self) -> LearningCurve {
        LearningCurve {
            model: self.model.clone(),
            epochs: self.epochs.clone(),
        }
    }

    /// `epoch,loss,acc,val_loss,val_acc`; missing validation values are
    /// empty fields.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "epoch,loss,acc,val_loss,val_acc")?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.epochs {
            writeln!(w, "{},{},{},{},{}", r.epoch, r.loss, r.acc, opt(r.val_loss), opt(r.val_acc))?;
        }
        Ok(())
    }
}

/// Mean loss and accuracy in evaluation mode.
pub fn evaluate(model: &dyn SequenceModel, set: &EncodedSet, batch_size: usize) -> Result<(f64, f64)> {
    if set.is_empty() {
        return Err(NeuralError::Config("cannot evaluate on an empty set".into()));
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    let mut start = 0;
    for probs in probabilities(model, &set.ids, batch_size)? {
        let n = probs.shape()[0];
        let labels = &set.labels[start..start + n];
        let tape = Tape::new();
        let l = model.loss(tape.leaf(probs.clone()), labels)?.item();
        loss += l * n as f64;
        correct += model.decide(&probs).iter().zip(labels).filter(|(a, b)| a == b).count();
        start += n;
    }
    Ok((loss / set.len() as f64, correct as f64 / set.len() as f64))
}

/// Trains `model` in place. Batches are drawn from a per-epoch shuffle
/// seeded with `seed ^ epoch` (epochs count from 1). Training loss and
/// accuracy are sample-weighted means over the epoch's batches, taken in
/// training mode; validation runs in evaluation mode.
pub fn train(
    model: &mut dyn SequenceModel,
    train: &EncodedSet,
    val: Option<&EncodedSet>,
    seed: u64,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainRun> {
    let sched = model.schedule();
    if train.is_empty() {
        return Err(NeuralError::Config("empty training set".into()));
    }
    if train.max_len != model.max_len() || val.is_some_and(|v| v.max_len != model.max_len()) {
        return Err(NeuralError::Config(format!("sequences must have length {}", model.max_len())));
    }
    let started = Instant::now();
    let mut opt = model.optimizer();
    let mut stopper = sched.patience.map(EarlyStopping::new);
    let mut best = None;
    let mut run = TrainRun {
        model: model.arch().to_string(),
        seed,
        epochs: Vec::new(),
        stopped_epoch: None,
        best_epoch: 1,
        restored_best: false,
        first_batch_loss: f64::NAN,
        wall_time_secs: 0.0,
    };
    let mut best_acc = f64::NEG_INFINITY;
    for epoch in 1..=sched.epochs {
        let mut order: Vec<usize> = (0..train.len()).collect();
        SplitMix64::new(seed ^ epoch as u64).shuffle(&mut order);
        let (mut loss_sum, mut correct) = (0.0, 0usize);
        for (b, chunk) in order.chunks(sched.batch_size).enumerate() {
            let (ids, labels) = train.gather(chunk);
            let key = DropoutKey {
                seed,
                epoch: epoch as u64,
                batch: b as u64,
            };
            let tape = Tape::new();
            let vars = model.params().bind(&tape);
            let probs = model.forward(&tape, &vars, &ids, Some(key))?;
            let loss = model.loss(probs, &labels)?;
            let l = loss.item();
            if !l.is_finite() {
                return Err(NeuralError::NonFiniteLoss { epoch, batch: b + 1 });
            }
            if epoch == 1 && b == 0 {
                run.first_batch_loss = l;
            }
            loss_sum += l * chunk.len() as f64;
            correct += model
                .decide(&probs.value())
                .iter()
                .zip(&labels)
                .filter(|(a, b)| a == b)
                .count();
            let mut grads = tape.backward(loss);
            let g: Vec<_> = vars.iter().map(|&v| grads.take_or_zeros(v)).collect();
            opt.step(model.params_mut(), &g)?;
        }
        let mut record = EpochRecord {
            epoch,
            loss: loss_sum / train.len() as f64,
            acc: correct as f64 / train.len() as f64,
            val_loss: None,
            val_acc: None,
        };
        if let Some(v) = val {
            let (l, a) = evaluate(model, v, sched.batch_size)?;
            record.val_loss = Some(l);
            record.val_acc = Some(a);
        }
        let monitored = record.val_acc.unwrap_or(record.acc);
        on_epoch(&record);
        run.epochs.push(record);
        if monitored > best_acc {
            best_acc = monitored;
            run.best_epoch = epoch;
        }
        if let Some(es) = stopper.as_mut() {
            match es.update(monitored) {
                StopDecision::Improved => best = Some(model.params().clone()),
                StopDecision::Continue => {}
                StopDecision::Stop => {
                    run.stopped_epoch = Some(epoch);
                    break;
                }
            }
        }
    }
    if let Some(p) = best {
        model.params_mut().assign(&p)?;
        run.restored_best = true;
    }
    run.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(run)
}
