//! Central-difference gradient checking.
//!
//! The checked function is reduced to a scalar as `sum(out * r)` with a
//! seeded random projection `r`, so every output element contributes.

use sentio_core::rng::SplitMix64;

use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::error::Result;

#[derive(Debug, Clone, Copy)]
pub struct GradcheckConfig {
    pub step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest tolerated fraction of elements skipped as kinks.
    pub max_skipped: f64,
    pub seed: u64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            step: 1e-6,
            rel_tol: 1e-4,
            abs_tol: 1e-7,
            max_skipped: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub input: usize,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GradcheckReport {
    pub checked: usize,
    /// Elements where the one-sided differences disagree (the function is
    /// not differentiable there, e.g. a relu at 0 or a max tie).
    pub skipped: usize,
    /// `(input, index, right slope, left slope)` of each skipped element.
    pub kinks: Vec<(usize, usize, f64, f64)>,
    pub max_abs: f64,
    pub max_rel: f64,
    pub mismatches: Vec<Mismatch>,
}

impl GradcheckReport {
    pub fn passed(&self, cfg: &GradcheckConfig) -> bool {
        self.mismatches.is_empty() && (self.skipped as f64) <= cfg.max_skipped * (self.checked + self.skipped) as f64
    }
}

/// Compares tape gradients of `f` at `inputs` with central differences.
pub fn gradcheck<F>(inputs: &[Tensor], f: F, cfg: &GradcheckConfig) -> Result<GradcheckReport>
where
    F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Result<Var<'t>>,
{
    let proj = {
        let tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
        let out = f(&tape, &vars)?;
        let mut rng = SplitMix64::new(cfg.seed);
        Tensor::from_fn(&out.shape(), |_| rng.uniform(-1.0, 1.0))
    };
    let eval = |xs: &[Tensor]| -> Result<f64> {
        let tape = Tape::new();
        let vars: Vec<Var> = xs.iter().map(|t| tape.leaf(t.clone())).collect();
        Ok(f(&tape, &vars)?.dot_const(&proj)?.item())
    };
    let analytic: Vec<Tensor> = {
        let tape = Tape::new();
        let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
        let loss = f(&tape, &vars)?.dot_const(&proj)?;
        let mut grads = tape.backward(loss);
        vars.iter().map(|&v| grads.take_or_zeros(v)).collect()
    };
    let f0 = eval(inputs)?;
    let mut report = GradcheckReport::default();
    let mut xs = inputs.to_vec();
    let h = cfg.step;
    for (k, g) in analytic.iter().enumerate() {
        for i in 0..xs[k].len() {
            let orig = xs[k].data()[i];
            xs[k].data_mut()[i] = orig + h;
            let fp = eval(&xs)?;
            xs[k].data_mut()[i] = orig - h;
            let fm = eval(&xs)?;
            xs[k].data_mut()[i] = orig;
            let numeric = (fp - fm) / (2.0 * h);
            let (right, left) = ((fp - f0) / h, (f0 - fm) / h);
            // one-sided slopes differ by O(h) on smooth functions
            if (right - left).abs() > 1e-5 + 1e-3 * right.abs().max(left.abs()) {
                report.skipped += 1;
                report.kinks.push((k, i, right, left));
                continue;
            }
            report.checked += 1;
            let a = g.data()[i];
            let abs = (a - numeric).abs();
            let rel = abs / a.abs().max(numeric.abs()).max(f64::MIN_POSITIVE);
            report.max_abs = report.max_abs.max(abs);
            if abs >= cfg.abs_tol {
                report.max_rel = report.max_rel.max(rel);
            }
            if rel >= cfg.rel_tol && abs >= cfg.abs_tol {
                report.mismatches.push(Mismatch {
                    input: k,
                    index: i,
                    analytic: a,
                    numeric,
                });
            }
        }
    }
    Ok(report)
}
