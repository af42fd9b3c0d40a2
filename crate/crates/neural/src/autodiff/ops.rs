//! Differentiable primitives.
//!
//! Shape conventions: sequences are `[batch, time, channels]`, conv kernels
//! `[k, c_in, c_out]`, dense kernels `[in, out]`. Operations act on the last
//! axis where an axis matters (bias, softmax, concat, slice).

use sentio_core::rng::SplitMix64;

use super::tape::Var;
use super::tensor::Tensor;
use crate::error::{NeuralError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    Valid,
    /// Output length equals input length; for even kernels the extra
    /// padding goes on the right.
    Same,
}

impl Padding {
    /// `(left, right)` zero padding for kernel size `k`.
    pub fn amounts(self, k: usize) -> (usize, usize) {
        match self {
            Padding::Valid => (0, 0),
            Padding::Same => ((k - 1) / 2, k - 1 - (k - 1) / 2),
        }
    }

    pub fn output_len(self, len: usize, k: usize) -> Option<usize> {
        let (l, r) = self.amounts(k);
        (len + l + r + 1).checked_sub(k)
    }
}

fn same_shape(op: &'static str, a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(NeuralError::shape(op, format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

fn rank(op: &'static str, t: &Tensor, r: usize) -> Result<()> {
    if t.shape().len() != r {
        return Err(NeuralError::shape(op, format!("expected rank {r}, got {:?}", t.shape())));
    }
    Ok(())
}

impl<'t> Var<'t> {
    /// Elementwise function whose derivative is expressed through its output.
    fn unary(self, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64 + 'static) -> Var<'t> {
        let value = self.value().map(f);
        self.tape.push(
            value,
            vec![self.id],
            Some(Box::new(move |g, _, y| {
                let grad = Tensor::from_fn(g.shape(), |i| g.data()[i] * df(y.data()[i]));
                vec![Some(grad)]
            })),
        )
    }

    /// Elementwise function whose derivative depends on the input.
    fn unary_x(self, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64 + 'static) -> Var<'t> {
        let value = self.value().map(f);
        self.tape.push(
            value,
            vec![self.id],
            Some(Box::new(move |g, p, _| {
                let x = p[0];
                vec![Some(Tensor::from_fn(g.shape(), |i| g.data()[i] * df(x.data()[i])))]
            })),
        )
    }

    pub fn add(self, other: Var<'t>) -> Result<Var<'t>> {
        let value = {
            let (a, b) = (self.value(), other.value());
            same_shape("add", &a, &b)?;
            Tensor::from_fn(a.shape(), |i| a.data()[i] + b.data()[i])
        };
        Ok(self.tape.push(
            value,
            vec![self.id, other.id],
            Some(Box::new(|g, _, _| vec![Some(g.clone()), Some(g.clone())])),
        ))
    }

    pub fn mul(self, other: Var<'t>) -> Result<Var<'t>> {
        let value = {
            let (a, b) = (self.value(), other.value());
            same_shape("mul", &a, &b)?;
            Tensor::from_fn(a.shape(), |i| a.data()[i] * b.data()[i])
        };
        Ok(self.tape.push(
            value,
            vec![self.id, other.id],
            Some(Box::new(|g, p, _| {
                let (a, b) = (p[0], p[1]);
                vec![
                    Some(Tensor::from_fn(g.shape(), |i| g.data()[i] * b.data()[i])),
                    Some(Tensor::from_fn(g.shape(), |i| g.data()[i] * a.data()[i])),
                ]
            })),
        ))
    }

    pub fn scale(self, c: f64) -> Var<'t> {
        self.unary(move |x| x * c, move |_| c)
    }

    /// `[m, k] x [k, n] -> [m, n]`.
    pub fn matmul(self, other: Var<'t>) -> Result<Var<'t>> {
        let (value, m, k, n) = {
            let (a, b) = (self.value(), other.value());
            rank("matmul", &a, 2)?;
            rank("matmul", &b, 2)?;
            let (m, k, n) = (a.shape()[0], a.shape()[1], b.shape()[1]);
            if b.shape()[0] != k {
                return Err(NeuralError::shape("matmul", format!("{:?} x {:?}", a.shape(), b.shape())));
            }
            (matmul_raw(a.data(), b.data(), m, k, n), m, k, n)
        };
        Ok(self.tape.push(
            Tensor::new(vec![m, n], value).expect("matmul shape"),
            vec![self.id, other.id],
            Some(Box::new(move |g, p, _| {
                let (a, b) = (p[0].data(), p[1].data());
                let g = g.data();
                // dA = G B^T, dB = A^T G
                let mut da = vec![0.0; m * k];
                for i in 0..m {
                    for j in 0..n {
                        let gij = g[i * n + j];
                        if gij == 0.0 {
                            continue;
                        }
                        for l in 0..k {
                            da[i * k + l] += gij * b[l * n + j];
                        }
                    }
                }
                let mut db = vec![0.0; k * n];
                for i in 0..m {
                    for l in 0..k {
                        let ail = a[i * k + l];
                        if ail == 0.0 {
                            continue;
                        }
                        let row = &mut db[l * n..(l + 1) * n];
                        for (d, &gij) in row.iter_mut().zip(&g[i * n..(i + 1) * n]) {
                            *d += ail * gij;
                        }
                    }
                }
                vec![
                    Some(Tensor::new(vec![m, k], da).expect("shape")),
                    Some(Tensor::new(vec![k, n], db).expect("shape")),
                ]
            })),
        ))
    }

    /// Adds `bias` (shape `[n]`) along the last axis.
    pub fn add_bias(self, bias: Var<'t>) -> Result<Var<'t>> {
        let value = {
            let (x, b) = (self.value(), bias.value());
            rank("add_bias", &b, 1)?;
            let n = b.len();
            if x.last_dim() != n || x.shape().is_empty() {
                return Err(NeuralError::shape("add_bias", format!("{:?} + {:?}", x.shape(), b.shape())));
            }
            Tensor::from_fn(x.shape(), |i| x.data()[i] + b.data()[i % n])
        };
        Ok(self.tape.push(
            value,
            vec![self.id, bias.id],
            Some(Box::new(|g, p, _| {
                let n = p[1].len();
                let mut db = vec![0.0; n];
                for (i, v) in g.data().iter().enumerate() {
                    db[i % n] += v;
                }
                vec![Some(g.clone()), Some(Tensor::new(vec![n], db).expect("shape"))]
            })),
        ))
    }

    /// `x W + b` for `x: [m, in]`.
    pub fn dense(self, w: Var<'t>, b: Var<'t>) -> Result<Var<'t>> {
        self.matmul(w)?.add_bias(b)
    }

    pub fn relu(self) -> Var<'t> {
        self.unary_x(|x| x.max(0.0), |x| if x > 0.0 { 1.0 } else { 0.0 })
    }

    pub fn sigmoid(self) -> Var<'t> {
        self.unary(sigmoid, |y| y * (1.0 - y))
    }

    pub fn tanh(self) -> Var<'t> {
        self.unary(f64::tanh, |y| 1.0 - y * y)
    }

    /// Softmax over the last axis.
    pub fn softmax(self) -> Result<Var<'t>> {
        let value = {
            let x = self.value();
            let n = x.last_dim();
            if n == 0 || x.is_empty() {
                return Err(NeuralError::shape("softmax", "empty axis"));
            }
            let mut out = x.data().to_vec();
            for row in out.chunks_mut(n) {
                let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut s = 0.0;
                for v in row.iter_mut() {
                    *v = (*v - m).exp();
                    s += *v;
                }
                row.iter_mut().for_each(|v| *v /= s);
            }
            Tensor::new(x.shape().to_vec(), out).expect("shape")
        };
        Ok(self.tape.push(
            value,
            vec![self.id],
            Some(Box::new(|g, _, y| {
                let n = y.last_dim();
                let mut dx = vec![0.0; y.len()];
                for ((dr, gr), yr) in dx.chunks_mut(n).zip(g.data().chunks(n)).zip(y.data().chunks(n)) {
                    let dot: f64 = gr.iter().zip(yr).map(|(a, b)| a * b).sum();
                    for j in 0..n {
                        dr[j] = yr[j] * (gr[j] - dot);
                    }
                }
                vec![Some(Tensor::new(y.shape().to_vec(), dx).expect("shape"))]
            })),
        ))
    }

    pub fn reshape(self, shape: &[usize]) -> Result<Var<'t>> {
        let value = self.value().clone().reshaped(shape)?;
        Ok(self.tape.push(
            value,
            vec![self.id],
            Some(Box::new(|g, p, _| {
                vec![Some(g.clone().reshaped(p[0].shape()).expect("same size"))]
            })),
        ))
    }

    /// `[b, ...] -> [b, prod(...)]`.
    pub fn flatten(self) -> Result<Var<'t>> {
        let shape = self.shape();
        if shape.is_empty() {
            return Err(NeuralError::shape("flatten", "scalar input"));
        }
        let rest: usize = shape[1..].iter().product();
        self.reshape(&[shape[0], rest])
    }

    /// Concatenate along the last axis; leading axes must agree.
    pub fn concat(self, other: Var<'t>) -> Result<Var<'t>> {
        let (value, na, nb) = {
            let (a, b) = (self.value(), other.value());
            let (sa, sb) = (a.shape(), b.shape());
            if sa.is_empty() || sa.len() != sb.len() || sa[..sa.len() - 1] != sb[..sb.len() - 1] {
                return Err(NeuralError::shape("concat", format!("{sa:?} ++ {sb:?}")));
            }
            let (na, nb) = (a.last_dim(), b.last_dim());
            let mut out = Vec::with_capacity(a.len() + b.len());
            let rows = if na > 0 { a.len() / na } else { b.len() / nb.max(1) };
            for r in 0..rows {
                out.extend_from_slice(&a.data()[r * na..(r + 1) * na]);
                out.extend_from_slice(&b.data()[r * nb..(r + 1) * nb]);
            }
            let mut shape = sa.to_vec();
            *shape.last_mut().expect("rank >= 1") = na + nb;
            (Tensor::new(shape, out).expect("shape"), na, nb)
        };
        Ok(self.tape.push(
            value,
            vec![self.id, other.id],
            Some(Box::new(move |g, p, _| {
                let (mut da, mut db) = (Vec::with_capacity(p[0].len()), Vec::with_capacity(p[1].len()));
                for row in g.data().chunks(na + nb) {
                    da.extend_from_slice(&row[..na]);
                    db.extend_from_slice(&row[na..]);
                }
                vec![
                    Some(Tensor::new(p[0].shape().to_vec(), da).expect("shape")),
                    Some(Tensor::new(p[1].shape().to_vec(), db).expect("shape")),
                ]
            })),
        ))
    }

    /// Columns `start..start + len` of the last axis.
    pub fn slice_last(self, start: usize, len: usize) -> Result<Var<'t>> {
        let value = {
            let x = self.value();
            let n = x.last_dim();
            if x.shape().is_empty() || start + len > n {
                return Err(NeuralError::shape("slice_last", format!("{start}+{len} of {:?}", x.shape())));
            }
            let mut out = Vec::with_capacity(x.len() / n.max(1) * len);
            for row in x.data().chunks(n) {
                out.extend_from_slice(&row[start..start + len]);
            }
            let mut shape = x.shape().to_vec();
            *shape.last_mut().expect("rank >= 1") = len;
            Tensor::new(shape, out).expect("shape")
        };
        Ok(self.tape.push(
            value,
            vec![self.id],
            Some(Box::new(move |g, p, _| {
                let n = p[0].last_dim();
                let mut dx = vec![0.0; p[0].len()];
                for (dr, gr) in dx.chunks_mut(n).zip(g.data().chunks(len)) {
                    dr[start..start + len].copy_from_slice(gr);
                }
                vec![Some(Tensor::new(p[0].shape().to_vec(), dx).expect("shape"))]
            })),
        ))
    }

    /// Time step `t` of a `[b, l, c]` sequence, as `[b, c]`.
    pub fn time_step(self, t: usize) -> Result<Var<'t>> {
        let value = {
            let x = self.value();
            rank("time_step", &x, 3)?;
            let (b, l, c) = (x.shape()[0], x.shape()[1], x.shape()[2]);
            if t >= l {
                return Err(NeuralError::shape("time_step", format!("step {t} of length {l}")));
            }
            let mut out = Vec::with_capacity(b * c);
            for i in 0..b {
                out.extend_from_slice(&x.data()[(i * l + t) * c..(i * l + t + 1) * c]);
            }
            Tensor::new(vec![b, c], out).expect("shape")
        };
        Ok(self.tape.push(
            value,
            vec![self.id],
            Some(Box::new(move |g, p, _| {
                let (b, l, c) = (p[0].shape()[0], p[0].shape()[1], p[0].shape()[2]);
                let mut dx = vec![0.0; p[0].len()];
                for i in 0..b {
                    dx[(i * l + t) * c..(i * l + t + 1) * c].copy_from_slice(&g.data()[i * c..(i + 1) * c]);
                }
                vec![Some(Tensor::new(vec![b, l, c], dx).expect("shape"))]
            })),
        ))
    }

    pub fn sum(self) -> Var<'t> {
        let s: f64 = self.value().data().iter().sum();
        self.tape.push(
            Tensor::scalar(s),
            vec![self.id],
            Some(Box::new(|g, p, _| vec![Some(Tensor::full(p[0].shape(), g.item()))])),
        )
    }

    pub fn mean(self) -> Var<'t> {
        let n = self.value().len() as f64;
        self.sum().scale(1.0 / n)
    }

    /// `sum(x * w)` for a constant `w` of the same shape.
    pub fn dot_const(self, w: &Tensor) -> Result<Var<'t>> {
        let s = {
            let x = self.value();
            same_shape("dot_const", &x, w)?;
            x.data().iter().zip(w.data()).map(|(a, b)| a * b).sum()
        };
        let w = w.clone();
        Ok(self.tape.push(
            Tensor::scalar(s),
            vec![self.id],
            Some(Box::new(move |g, _, _| vec![Some(w.map(|v| v * g.item()))])),
        ))
    }

    /// Rows of `table` (`[v, d]`) for `ids` laid out as `shape`; the result
    /// has shape `shape ++ [d]`.
    pub fn embedding(self, ids: &[usize], shape: &[usize]) -> Result<Var<'t>> {
        let value = {
            let table = self.value();
            rank("embedding", &table, 2)?;
            let (v, d) = (table.shape()[0], table.shape()[1]);
            if shape.iter().product::<usize>() != ids.len() {
                return Err(NeuralError::shape("embedding", format!("{} ids for shape {shape:?}", ids.len())));
            }
            if let Some(&bad) = ids.iter().find(|&&i| i >= v) {
                return Err(NeuralError::shape("embedding", format!("id {bad} outside vocabulary of {v}")));
            }
            let mut out = Vec::with_capacity(ids.len() * d);
            for &i in ids {
                out.extend_from_slice(&table.data()[i * d..(i + 1) * d]);
            }
            let mut s = shape.to_vec();
            s.push(d);
            Tensor::new(s, out).expect("shape")
        };
        let ids = ids.to_vec();
        Ok(self.tape.push(
            value,
            vec![self.id],
            Some(Box::new(move |g, p, _| {
                let d = p[0].shape()[1];
                let mut dt = Tensor::zeros(p[0].shape());
                let data = dt.data_mut();
                for (k, &i) in ids.iter().enumerate() {
                    for (a, b) in data[i * d..(i + 1) * d].iter_mut().zip(&g.data()[k * d..(k + 1) * d]) {
                        *a += b;
                    }
                }
                vec![Some(dt)]
            })),
        ))
    }

    /// Stride-1 1-D convolution (cross-correlation) of `[b, l, c_in]` with
    /// `w: [k, c_in, c_out]` plus `bias: [c_out]`.
    pub fn conv1d(self, w: Var<'t>, bias: Var<'t>, padding: Padding) -> Result<Var<'t>> {
        let (value, dims) = {
            let (x, w, bias) = (self.value(), w.value(), bias.value());
            rank("conv1d", &x, 3)?;
            rank("conv1d", &w, 3)?;
            let (b, l, cin) = (x.shape()[0], x.shape()[1], x.shape()[2]);
            let (k, wcin, cout) = (w.shape()[0], w.shape()[1], w.shape()[2]);
            if wcin != cin || bias.shape() != [cout] || k == 0 {
                return Err(NeuralError::shape(
                    "conv1d",
                    format!("input {:?}, kernel {:?}, bias {:?}", x.shape(), w.shape(), bias.shape()),
                ));
            }
            let lout = padding
                .output_len(l, k)
                .filter(|&n| n > 0)
                .ok_or_else(|| NeuralError::shape("conv1d", format!("length {l} shorter than kernel {k}")))?;
            let (pl, _) = padding.amounts(k);
            let dims = ConvDims { b, l, cin, k, cout, lout, pl };
            (conv_forward(x.data(), w.data(), bias.data(), &dims), dims)
        };
        Ok(self.tape.push(
            Tensor::new(vec![dims.b, dims.lout, dims.cout], value).expect("shape"),
            vec![self.id, w.id, bias.id],
            Some(Box::new(move |g, p, _| {
                let (dx, dw, db) = conv_backward(p[0].data(), p[1].data(), g.data(), &dims);
                vec![
                    Some(Tensor::new(vec![dims.b, dims.l, dims.cin], dx).expect("shape")),
                    Some(Tensor::new(vec![dims.k, dims.cin, dims.cout], dw).expect("shape")),
                    Some(Tensor::new(vec![dims.cout], db).expect("shape")),
                ]
            })),
        ))
    }

    /// Non-overlapping max pooling over time, window and stride `p`; a
    /// trailing partial window is dropped. Ties go to the earliest position.
    pub fn maxpool1d(self, pool: usize) -> Result<Var<'t>> {
        let (value, argmax) = {
            let x = self.value();
            rank("maxpool1d", &x, 3)?;
            let (b, l, c) = (x.shape()[0], x.shape()[1], x.shape()[2]);
            if pool == 0 || l < pool {
                return Err(NeuralError::shape("maxpool1d", format!("pool {pool} over length {l}")));
            }
            let lo = l / pool;
            let mut out = vec![f64::NEG_INFINITY; b * lo * c];
            let mut arg = vec![0usize; b * lo * c];
            let xd = x.data();
            for i in 0..b {
                for t in 0..lo {
                    for s in 0..pool {
                        let src = (i * l + t * pool + s) * c;
                        let dst = (i * lo + t) * c;
                        for ch in 0..c {
                            if xd[src + ch] > out[dst + ch] {
                                out[dst + ch] = xd[src + ch];
                                arg[dst + ch] = src + ch;
                            }
                        }
                    }
                }
            }
            (Tensor::new(vec![b, lo, c], out).expect("shape"), arg)
        };
        Ok(self.tape.push(
            value,
            vec![self.id],
            Some(Box::new(move |g, p, _| {
                let mut dx = Tensor::zeros(p[0].shape());
                let d = dx.data_mut();
                for (k, &src) in argmax.iter().enumerate() {
                    d[src] += g.data()[k];
                }
                vec![Some(dx)]
            })),
        ))
    }

    /// Inverted dropout: with `seed` set, zero each element with probability
    /// `rate` and scale survivors by `1 / (1 - rate)`; without a seed
    /// (evaluation) the input passes through unchanged.
    pub fn dropout(self, rate: f64, seed: Option<u64>) -> Result<Var<'t>> {
        if !(0.0..1.0).contains(&rate) {
            return Err(NeuralError::Config(format!("dropout rate {rate} outside [0, 1)")));
        }
        let Some(seed) = seed else { return Ok(self) };
        if rate == 0.0 {
            return Ok(self);
        }
        let mut rng = SplitMix64::new(seed);
        let keep = 1.0 / (1.0 - rate);
        let n = self.value().len();
        let mask: Vec<f64> = (0..n).map(|_| if rng.next_f64() < rate { 0.0 } else { keep }).collect();
        let value = {
            let x = self.value();
            Tensor::from_fn(x.shape(), |i| x.data()[i] * mask[i])
        };
        Ok(self.tape.push(
            value,
            vec![self.id],
            Some(Box::new(move |g, _, _| vec![Some(Tensor::from_fn(g.shape(), |i| g.data()[i] * mask[i]))])),
        ))
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn matmul_raw(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for l in 0..k {
            let ail = a[i * k + l];
            if ail == 0.0 {
                continue;
            }
            for (o, &bv) in row.iter_mut().zip(&b[l * n..(l + 1) * n]) {
                *o += ail * bv;
            }
        }
    }
    out
}

#[derive(Clone, Copy)]
struct ConvDims {
    b: usize,
    l: usize,
    cin: usize,
    k: usize,
    cout: usize,
    lout: usize,
    pl: usize,
}

/// Input position feeding output `t` through kernel tap `j`, if inside.
fn tap(d: &ConvDims, t: usize, j: usize) -> Option<usize> {
    (t + j).checked_sub(d.pl).filter(|&s| s < d.l)
}

fn conv_forward(x: &[f64], w: &[f64], bias: &[f64], d: &ConvDims) -> Vec<f64> {
    let mut out = vec![0.0; d.b * d.lout * d.cout];
    for i in 0..d.b {
        for t in 0..d.lout {
            let o = &mut out[(i * d.lout + t) * d.cout..(i * d.lout + t + 1) * d.cout];
            o.copy_from_slice(bias);
            for j in 0..d.k {
                let Some(s) = tap(d, t, j) else { continue };
                let xs = &x[(i * d.l + s) * d.cin..(i * d.l + s + 1) * d.cin];
                for (ci, &xv) in xs.iter().enumerate() {
                    if xv == 0.0 {
                        continue;
                    }
                    let wr = &w[(j * d.cin + ci) * d.cout..(j * d.cin + ci + 1) * d.cout];
                    for (ov, &wv) in o.iter_mut().zip(wr) {
                        *ov += xv * wv;
                    }
                }
            }
        }
    }
    out
}

fn conv_backward(x: &[f64], w: &[f64], g: &[f64], d: &ConvDims) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut dx = vec![0.0; x.len()];
    let mut dw = vec![0.0; w.len()];
    let mut db = vec![0.0; d.cout];
    for i in 0..d.b {
        for t in 0..d.lout {
            let go = &g[(i * d.lout + t) * d.cout..(i * d.lout + t + 1) * d.cout];
            for (a, b) in db.iter_mut().zip(go) {
                *a += b;
            }
            for j in 0..d.k {
                let Some(s) = tap(d, t, j) else { continue };
                let base = (i * d.l + s) * d.cin;
                for ci in 0..d.cin {
                    let xv = x[base + ci];
                    let wr = &w[(j * d.cin + ci) * d.cout..(j * d.cin + ci + 1) * d.cout];
                    let dwr = &mut dw[(j * d.cin + ci) * d.cout..(j * d.cin + ci + 1) * d.cout];
                    let mut acc = 0.0;
                    for co in 0..d.cout {
                        acc += go[co] * wr[co];
                        dwr[co] += xv * go[co];
                    }
                    dx[base + ci] += acc;
                }
            }
        }
    }
    (dx, dw, db)
}
