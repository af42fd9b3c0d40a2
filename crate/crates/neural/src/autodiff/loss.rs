//! Batch-mean losses over probabilities.

use super::tape::Var;
use super::tensor::Tensor;
use crate::error::{NeuralError, Result};

/// Probabilities are clipped to `[EPSILON, 1 - EPSILON]` before taking logs.
pub const EPSILON: f64 = 1e-7;

/// Smoothed target for a binary label.
pub fn smooth(y: f64, eps: f64) -> f64 {
    y * (1.0 - eps) + eps / 2.0
}

/// Binary cross-entropy of one probability against a smoothed target.
pub fn bce(p: f64, y: f64, eps: f64) -> f64 {
    let t = smooth(y, eps);
    let p = p.clamp(EPSILON, 1.0 - EPSILON);
    -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
}

/// Mean binary cross-entropy with label smoothing `eps`. `probs` has one
/// value per target (shape `[b]` or `[b, 1]`); targets are 0 or 1.
pub fn bce_label_smoothed<'t>(probs: Var<'t>, targets: &[f64], eps: f64) -> Result<Var<'t>> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(NeuralError::Config(format!("label smoothing {eps} outside [0, 1]")));
    }
    let value = {
        let p = probs.value();
        if p.len() != targets.len() || targets.is_empty() {
            return Err(NeuralError::shape("bce", format!("{:?} vs {} targets", p.shape(), targets.len())));
        }
        let s: f64 = p.data().iter().zip(targets).map(|(&p, &y)| bce(p, y, eps)).sum();
        s / targets.len() as f64
    };
    let t: Vec<f64> = targets.iter().map(|&y| smooth(y, eps)).collect();
    Ok(probs.tape.push(
        Tensor::scalar(value),
        vec![probs.id],
        Some(Box::new(move |g, p, _| {
            let n = t.len() as f64;
            let g = g.item();
            let d = Tensor::from_fn(p[0].shape(), |i| {
                let x = p[0].data()[i];
                if !(EPSILON..=1.0 - EPSILON).contains(&x) {
                    return 0.0;
                }
                g * (-(t[i] / x) + (1.0 - t[i]) / (1.0 - x)) / n
            });
            vec![Some(d)]
        })),
    ))
}

/// Mean categorical cross-entropy of `probs: [b, k]` against one-hot (or
/// soft) `targets` laid out row-major.
pub fn categorical_ce<'t>(probs: Var<'t>, targets: &[f64]) -> Result<Var<'t>> {
    let (value, b) = {
        let p = probs.value();
        if p.shape().len() != 2 || p.len() != targets.len() || p.is_empty() {
            return Err(NeuralError::shape("categorical_ce", format!("{:?} vs {} targets", p.shape(), targets.len())));
        }
        let s: f64 = p
            .data()
            .iter()
            .zip(targets)
            .filter(|(_, &y)| y != 0.0)
            .map(|(&p, &y)| -y * p.clamp(EPSILON, 1.0 - EPSILON).ln())
            .sum();
        (s / p.shape()[0] as f64, p.shape()[0])
    };
    let t = targets.to_vec();
    Ok(probs.tape.push(
        Tensor::scalar(value),
        vec![probs.id],
        Some(Box::new(move |g, p, _| {
            let g = g.item();
            let d = Tensor::from_fn(p[0].shape(), |i| {
                let x = p[0].data()[i];
                if t[i] == 0.0 || !(EPSILON..=1.0 - EPSILON).contains(&x) {
                    return 0.0;
                }
                -g * t[i] / x / b as f64
            });
            vec![Some(d)]
        })),
    ))
}
