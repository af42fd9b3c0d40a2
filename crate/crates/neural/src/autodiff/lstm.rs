//! LSTM cell and bidirectional wrapper.
//!
//! Gate layout along the `4h` axis is `[i, f, g, o]`:
//!
//! ```text
//! z  = x W + h_prev U + b
//! i  = sigmoid(z_i)   f = sigmoid(z_f)   g = tanh(z_g)   o = sigmoid(z_o)
//! c  = f * c_prev + i * g
//! h  = o * tanh(c)
//! ```

use sentio_core::rng::SplitMix64;

use super::param::{glorot_uniform, ParamSet};
use super::tape::Var;
use super::tensor::Tensor;
use crate::error::{NeuralError, Result};

/// Weights of one LSTM direction on a tape.
#[derive(Debug, Clone, Copy)]
pub struct LstmWeights<'t> {
    /// `[input, 4h]`
    pub kernel: Var<'t>,
    /// `[h, 4h]`
    pub recurrent: Var<'t>,
    /// `[4h]`
    pub bias: Var<'t>,
}

impl LstmWeights<'_> {
    pub fn hidden(&self) -> usize {
        self.bias.shape()[0] / 4
    }
}

/// Adds `{prefix}.kernel`, `{prefix}.recurrent` and `{prefix}.bias` to
/// `params`: Glorot-uniform kernels, zero bias except 1.0 on the forget gate.
/// Returns the index of the kernel; the others follow it.
pub fn init_lstm(params: &mut ParamSet, prefix: &str, input: usize, hidden: usize, rng: &mut SplitMix64) -> usize {
    let k = params.push(format!("{prefix}.kernel"), glorot_uniform(&[input, 4 * hidden], input, 4 * hidden, rng));
    params.push(
        format!("{prefix}.recurrent"),
        glorot_uniform(&[hidden, 4 * hidden], hidden, 4 * hidden, rng),
    );
    let bias = Tensor::from_fn(&[4 * hidden], |i| if (hidden..2 * hidden).contains(&i) { 1.0 } else { 0.0 });
    params.push(format!("{prefix}.bias"), bias);
    k
}

/// One step: `x: [b, input]`, `h, c: [b, hidden]`.
pub fn lstm_cell<'t>(x: Var<'t>, h: Var<'t>, c: Var<'t>, w: &LstmWeights<'t>) -> Result<(Var<'t>, Var<'t>)> {
    let hd = w.hidden();
    if w.recurrent.shape() != [hd, 4 * hd] || h.shape() != c.shape() {
        return Err(NeuralError::shape(
            "lstm_cell",
            format!("recurrent {:?}, h {:?}, c {:?}", w.recurrent.shape(), h.shape(), c.shape()),
        ));
    }
    let z = x.matmul(w.kernel)?.add(h.matmul(w.recurrent)?)?.add_bias(w.bias)?;
    let i = z.slice_last(0, hd)?.sigmoid();
    let f = z.slice_last(hd, hd)?.sigmoid();
    let g = z.slice_last(2 * hd, hd)?.tanh();
    let o = z.slice_last(3 * hd, hd)?.sigmoid();
    let c = f.mul(c)?.add(i.mul(g)?)?;
    let h = o.mul(c.tanh())?;
    Ok((h, c))
}

/// Runs `seq: [b, l, input]` forward through `fwd` and reversed through
/// `bwd`; returns the final hidden states concatenated as `[b, 2h]`
/// (forward half first).
pub fn bilstm<'t>(seq: Var<'t>, fwd: &LstmWeights<'t>, bwd: &LstmWeights<'t>) -> Result<Var<'t>> {
    let shape = seq.shape();
    if shape.len() != 3 || shape[1] == 0 {
        return Err(NeuralError::shape("bilstm", format!("sequence {shape:?}")));
    }
    let (b, l) = (shape[0], shape[1]);
    let tape = seq.tape();
    let run = |w: &LstmWeights<'t>, order: &mut dyn Iterator<Item = usize>| -> Result<Var<'t>> {
        let zero = Tensor::zeros(&[b, w.hidden()]);
        let (mut h, mut c) = (tape.leaf(zero.clone()), tape.leaf(zero));
        for t in order {
            (h, c) = lstm_cell(seq.time_step(t)?, h, c, w)?;
        }
        Ok(h)
    };
    let hf = run(fwd, &mut (0..l))?;
    let hb = run(bwd, &mut (0..l).rev())?;
    hf.concat(hb)
}

/// Binds three consecutive parameters starting at `at` as LSTM weights.
pub fn bind_lstm<'t>(vars: &[Var<'t>], at: usize) -> LstmWeights<'t> {
    LstmWeights {
        kernel: vars[at],
        recurrent: vars[at + 1],
        bias: vars[at + 2],
    }
}
