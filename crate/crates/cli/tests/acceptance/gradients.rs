//! Central-difference checks of every autodiff primitive, both losses, the
//! LSTM cell and a full forward pass of each architecture, 100 seeds each.

use std::time::Instant;

use sentio_core::SentimentLabel::{self, Negative, Positive};
use sentio_core::SplitMix64;
use sentio_neural::archs::{BilstmModel, BilstmSpec, CnnModel, CnnSpec, DropoutKey, SequenceModel};
use sentio_neural::autodiff::gradcheck::{gradcheck, GradcheckConfig};
use sentio_neural::autodiff::loss::{bce_label_smoothed, categorical_ce};
use sentio_neural::autodiff::lstm::{bilstm, lstm_cell, LstmWeights};
use sentio_neural::autodiff::{Padding, Tape, Tensor, Var};
use sentio_neural::Result;

use super::support::Verdict;

const SEEDS: u64 = 100;

fn rand(rng: &mut SplitMix64, shape: &[usize], lo: f64, hi: f64) -> Tensor {
    Tensor::from_fn(shape, |_| rng.uniform(lo, hi))
}

fn dim(rng: &mut SplitMix64, lo: usize, hi: usize) -> usize {
    lo + rng.below(hi - lo + 1)
}

#[derive(Default)]
struct Suite {
    cases: usize,
    elements: usize,
    kinks: usize,
    max_abs: f64,
    max_rel: f64,
    failures: Vec<String>,
}

impl Suite {
    fn check<F>(&mut self, name: &str, seed: u64, inputs: &[Tensor], f: F)
    where
        F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Result<Var<'t>>,
    {
        let cfg = GradcheckConfig { seed, ..GradcheckConfig::default() };
        self.cases += 1;
        match gradcheck(inputs, f, &cfg) {
            Ok(r) => {
                self.elements += r.checked;
                self.kinks += r.skipped;
                self.max_abs = self.max_abs.max(r.max_abs);
                self.max_rel = self.max_rel.max(r.max_rel);
                if !r.passed(&cfg) {
                    self.failures.push(format!(
                        "{name} seed {seed}: {} mismatches, {} kinks",
                        r.mismatches.len(),
                        r.skipped
                    ));
                }
            }
            Err(e) => self.failures.push(format!("{name} seed {seed}: {e}")),
        }
    }

    fn each<G, F>(&mut self, name: &str, mut gen: G, f: F)
    where
        G: FnMut(&mut SplitMix64) -> Vec<Tensor>,
        F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Result<Var<'t>> + Copy,
    {
        for seed in 0..SEEDS {
            let mut rng = SplitMix64::new(seed * 7919 + name.len() as u64);
            let inputs = gen(&mut rng);
            self.check(name, seed, &inputs, f);
        }
    }
}

fn primitives(s: &mut Suite) {
    let pair = |r: &mut SplitMix64| {
        let sh = [dim(r, 1, 4), dim(r, 1, 5)];
        vec![rand(r, &sh, -2.0, 2.0), rand(r, &sh, -2.0, 2.0)]
    };
    s.each("add", pair, |_, v| v[0].add(v[1]));
    s.each("mul", pair, |_, v| v[0].mul(v[1]));
    s.each("scale", pair, |_, v| Ok(v[0].scale(-1.5)));
    s.each("relu", pair, |_, v| Ok(v[0].relu()));
    s.each("sigmoid", pair, |_, v| Ok(v[0].sigmoid()));
    s.each("tanh", pair, |_, v| Ok(v[0].tanh()));
    s.each("softmax", pair, |_, v| v[0].softmax());
    s.each("sum", pair, |_, v| Ok(v[0].sum()));
    s.each("mean", pair, |_, v| Ok(v[0].mean()));
    s.each("dropout", pair, |_, v| v[0].dropout(0.4, Some(11)));

    let cube = |r: &mut SplitMix64| {
        let sh = [dim(r, 1, 3), dim(r, 1, 4), dim(r, 2, 5)];
        vec![rand(r, &sh, -1.0, 1.0), rand(r, &sh, -1.0, 1.0)]
    };
    s.each("flatten", cube, |_, v| v[0].flatten());
    s.each("reshape", cube, |_, v| {
        let n: usize = v[0].shape().iter().product();
        v[0].reshape(&[n])
    });
    s.each("concat", cube, |_, v| v[0].concat(v[1]));
    s.each("slice_last", cube, |_, v| v[0].slice_last(1, 1));
    s.each("time_step", cube, |_, v| v[0].time_step(0));

    let mats = |r: &mut SplitMix64| {
        let (m, k, n) = (dim(r, 1, 4), dim(r, 1, 5), dim(r, 1, 4));
        vec![rand(r, &[m, k], -1.0, 1.0), rand(r, &[k, n], -1.0, 1.0), rand(r, &[n], -1.0, 1.0)]
    };
    s.each("matmul", mats, |_, v| v[0].matmul(v[1]));
    s.each("add_bias", mats, |_, v| v[0].matmul(v[1])?.add_bias(v[2]));
    s.each("dense", mats, |_, v| v[0].dense(v[1], v[2]));

    let conv = |r: &mut SplitMix64| {
        let (b, k, cin, cout) = (dim(r, 1, 2), dim(r, 1, 4), dim(r, 1, 3), dim(r, 1, 3));
        let l = dim(r, k, k + 4);
        vec![rand(r, &[b, l, cin], -1.0, 1.0), rand(r, &[k, cin, cout], -1.0, 1.0), rand(r, &[cout], -1.0, 1.0)]
    };
    s.each("conv1d_valid", conv, |_, v| v[0].conv1d(v[1], v[2], Padding::Valid));
    s.each("conv1d_same", conv, |_, v| v[0].conv1d(v[1], v[2], Padding::Same));

    for seed in 0..SEEDS {
        let mut r = SplitMix64::new(seed);
        let (vocab, d, b, l) = (dim(&mut r, 2, 6), dim(&mut r, 1, 4), dim(&mut r, 1, 3), dim(&mut r, 1, 4));
        let ids: Vec<usize> = (0..b * l).map(|_| r.below(vocab)).collect();
        let table = rand(&mut r, &[vocab, d], -1.0, 1.0);
        s.check("embedding", seed, &[table], |_, x| x[0].embedding(&ids, &[b, l]));

        let p = dim(&mut r, 1, 3);
        let sh = [dim(&mut r, 1, 2), dim(&mut r, p, 3 * p + 1), dim(&mut r, 1, 3)];
        let x = rand(&mut r, &sh, -1.0, 1.0);
        s.check("maxpool1d", seed, &[x], |_, v| v[0].maxpool1d(p));
    }
}

fn losses(s: &mut Suite) {
    for seed in 0..SEEDS {
        let mut r = SplitMix64::new(seed ^ 0x1055);
        let b = dim(&mut r, 1, 6);
        let p = rand(&mut r, &[b, 1], 0.05, 0.95);
        let y: Vec<f64> = (0..b).map(|_| r.below(2) as f64).collect();
        s.check("bce_smoothed_0.1", seed, &[p.clone()], |_, v| bce_label_smoothed(v[0], &y, 0.1));
        s.check("bce_plain", seed, &[p], |_, v| bce_label_smoothed(v[0], &y, 0.0));

        let (b, k) = (dim(&mut r, 1, 5), dim(&mut r, 2, 4));
        let mut onehot = vec![0.0; b * k];
        for i in 0..b {
            onehot[i * k + r.below(k)] = 1.0;
        }
        let logits = rand(&mut r, &[b, k], -2.0, 2.0);
        s.check("cce_softmax", seed, &[logits], |_, v| categorical_ce(v[0].softmax()?, &onehot));
        let probs = rand(&mut r, &[b, k], 0.05, 0.95);
        s.check("cce", seed, &[probs], |_, v| categorical_ce(v[0], &onehot));
    }
}

fn recurrent(s: &mut Suite) {
    let gen = |r: &mut SplitMix64| {
        let (b, i, h, l) = (dim(r, 1, 2), dim(r, 1, 3), dim(r, 1, 3), dim(r, 1, 4));
        let mut w = vec![rand(r, &[b, l, i], -1.0, 1.0)];
        for _ in 0..2 {
            w.push(rand(r, &[i, 4 * h], -0.8, 0.8));
            w.push(rand(r, &[h, 4 * h], -0.8, 0.8));
            w.push(rand(r, &[4 * h], -0.5, 0.5));
        }
        w
    };
    s.each("lstm_cell", gen, |tape, v| {
        let w = LstmWeights { kernel: v[1], recurrent: v[2], bias: v[3] };
        let h0 = tape.leaf(Tensor::full(&[v[0].shape()[0], w.hidden()], 0.3));
        let (h, c) = lstm_cell(v[0].time_step(0)?, h0, h0, &w)?;
        h.concat(c)
    });
    s.each("bilstm", gen, |_, v| {
        let f = LstmWeights { kernel: v[1], recurrent: v[2], bias: v[3] };
        let b = LstmWeights { kernel: v[4], recurrent: v[5], bias: v[6] };
        bilstm(v[0], &f, &b)
    });
}

/// Parameters plus small noise so zero biases do not sit relu inputs on
/// the kink.
fn jittered(m: &dyn SequenceModel, seed: u64) -> Vec<Tensor> {
    let mut rng = SplitMix64::new(seed ^ 0xabc);
    m.params()
        .iter()
        .map(|p| {
            let mut t = p.value.clone();
            for x in t.data_mut() {
                *x += rng.uniform(-0.1, 0.1);
            }
            t
        })
        .collect()
}

fn architectures(s: &mut Suite) {
    let y: Vec<SentimentLabel> = vec![Positive, Negative];
    for seed in 0..SEEDS {
        let key = Some(DropoutKey { seed, epoch: 1, batch: 0 });
        let mut rng = SplitMix64::new(seed);

        let spec = CnnSpec { max_len: 29, embed_dim: 3, filters: vec![2, 2, 2], dense: 3, ..CnnSpec::default() };
        let m = CnnModel::new(spec, 6, seed).expect("valid spec");
        // unpadded ids: runs of padding produce exact max-pool ties
        let ids: Vec<usize> = (0..2 * 29).map(|_| rng.below(6)).collect();
        let inputs = jittered(&m, seed);
        s.check("cnn_forward", seed, &inputs, |_, v| m.loss(m.forward(v[0].tape(), v, &ids, key)?, &y));

        let spec = BilstmSpec { max_len: 6, embed_dim: 3, conv_filters: 2, units: 2, ..BilstmSpec::default() };
        let m = BilstmModel::new(spec, 6, seed).expect("valid spec");
        let ids: Vec<usize> = (0..2 * 6).map(|_| rng.below(6)).collect();
        let inputs = jittered(&m, seed);
        s.check("bilstm_forward", seed, &inputs, |_, v| m.loss(m.forward(v[0].tape(), v, &ids, key)?, &y));
    }
}

pub fn run() -> Verdict {
    let start = Instant::now();
    let mut s = Suite::default();
    primitives(&mut s);
    losses(&mut s);
    recurrent(&mut s);
    architectures(&mut s);
    let secs = start.elapsed().as_secs_f64();
    let mut checks: Vec<(bool, String)> = s.failures.iter().take(10).map(|f| (false, f.clone())).collect();
    checks.push((secs < 120.0, format!("took {secs:.1}s, limit 120s")));
    let cfg = GradcheckConfig::default();
    Verdict::from_checks(
        &checks,
        format!(
            "{} checks ({} seeds per case), {} elements; rel error < {:e} wherever |error| >= {:e} (max rel there {:.1e}); largest |error| {:.1e}; {} kinks skipped",
            s.cases, SEEDS, s.elements, cfg.rel_tol, cfg.abs_tol, s.max_rel, s.max_abs, s.kinks
        ),
    )
}
