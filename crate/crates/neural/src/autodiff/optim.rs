//! Optimizers and early stopping.

use serde::{Deserialize, Serialize};

use super::param::ParamSet;
use super::tensor::Tensor;
use crate::error::{NeuralError, Result};

pub trait Optimizer {
    /// Applies one update. `grads` follows the order of `params`. Nothing is
    /// changed when any gradient is non-finite.
    fn step(&mut self, params: &mut ParamSet, grads: &[Tensor]) -> Result<()>;

    /// Number of completed updates.
    fn steps(&self) -> u64;
}

fn check(params: &ParamSet, grads: &[Tensor]) -> Result<()> {
    if grads.len() != params.len() {
        return Err(NeuralError::Config(format!(
            "{} gradients for {} parameters",
            grads.len(),
            params.len()
        )));
    }
    for (p, g) in params.iter().zip(grads) {
        if g.shape() != p.value.shape() {
            return Err(NeuralError::shape("optimizer", format!("gradient {:?} for {} {:?}", g.shape(), p.name, p.value.shape())));
        }
        if !g.is_finite() {
            return Err(NeuralError::NonFiniteGradient(p.name.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    #[serde(skip)]
    t: u64,
    #[serde(skip)]
    m: Vec<Vec<f64>>,
    #[serde(skip)]
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }
}

impl Optimizer for Adam {
    fn step(&mut self, params: &mut ParamSet, grads: &[Tensor]) -> Result<()> {
        check(params, grads)?;
        if self.m.is_empty() {
            self.m = params.iter().map(|p| vec![0.0; p.value.len()]).collect();
            self.v = self.m.clone();
        }
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for (((w, &g), m), v) in p.value.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                *w -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
            }
        }
        Ok(())
    }

    fn steps(&self) -> u64 {
        self.t
    }
}

/// SGD with classical (non-Nesterov) momentum and time-based decay
/// `lr_t = lr0 / (1 + decay * t)`, `t` counting completed updates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SgdMomentum {
    pub lr0: f64,
    pub momentum: f64,
    pub decay: f64,
    #[serde(skip)]
    t: u64,
    #[serde(skip)]
    velocity: Vec<Vec<f64>>,
}

impl SgdMomentum {
    pub fn new(lr0: f64, momentum: f64, decay: f64) -> Self {
        Self {
            lr0,
            momentum,
            decay,
            t: 0,
            velocity: Vec::new(),
        }
    }

    pub fn current_lr(&self) -> f64 {
        self.lr0 / (1.0 + self.decay * self.t as f64)
    }
}

impl Optimizer for SgdMomentum {
    fn step(&mut self, params: &mut ParamSet, grads: &[Tensor]) -> Result<()> {
        check(params, grads)?;
        if self.velocity.is_empty() {
            self.velocity = params.iter().map(|p| vec![0.0; p.value.len()]).collect();
        }
        let lr = self.current_lr();
        for ((p, g), vel) in params.iter_mut().zip(grads).zip(&mut self.velocity) {
            for ((w, &g), v) in p.value.data_mut().iter_mut().zip(g.data()).zip(vel.iter_mut()) {
                *v = self.momentum * *v - lr * g;
                *w += *v;
            }
        }
        self.t += 1;
        Ok(())
    }

    fn steps(&self) -> u64 {
        self.t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    Continue,
    Stop,
}

/// Stops after `patience` consecutive values that fail to beat the best so
/// far (strictly greater counts as improvement).
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    pub patience: usize,
    pub history: Vec<f64>,
    pub best: Option<f64>,
    /// 0-based position of `best` in `history`.
    pub best_index: usize,
    pub since_improvement: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            history: Vec::new(),
            best: None,
            best_index: 0,
            since_improvement: 0,
        }
    }

    pub fn update(&mut self, value: f64) -> StopDecision {
        self.history.push(value);
        if self.best.map_or(true, |b| value > b) {
            self.best = Some(value);
            self.best_index = self.history.len() - 1;
            self.since_improvement = 0;
            return StopDecision::Improved;
        }
        self.since_improvement += 1;
        if self.since_improvement >= self.patience {
            StopDecision::Stop
        } else {
            StopDecision::Continue
        }
    }
}
