//! Word embeddings trained with negative sampling, in skip-gram or CBOW
//! mode, and mean-pooled document vectors.
//!
//! Training is single threaded and fully determined by the seed. Negatives
//! are drawn from the unigram distribution raised to 0.75; the learning rate
//! decays linearly from `initial_lr` to `min_lr` over all updates. There is
//! no frequent-word subsampling.

use std::io::{BufRead, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedMode {
    Cbow,
    Skipgram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedTrainConfig {
    pub mode: EmbedMode,
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub min_lr: f64,
    pub min_count: u64,
    pub seed: u64,
}

impl Default for EmbedTrainConfig {
    fn default() -> Self {
        Self {
            mode: EmbedMode::Skipgram,
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            min_lr: 1e-4,
            min_count: 1,
            seed: 0,
        }
    }
}

impl EmbedTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.negatives == 0 {
            return Err(Error::invalid("dim, window and negatives must be at least 1"));
        }
        if !(self.initial_lr > 0.0) || self.min_lr < 0.0 {
            return Err(Error::invalid("learning rates must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub vocab: IndexMap<String, usize>,
    pub dim: usize,
    /// Input vectors, row-major `|V| x dim`.
    pub vectors: Vec<f64>,
    /// Output (context) vectors, row-major `|V| x dim`.
    pub context_vectors: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling loss for one input vector `v`, its positive output
/// vector and a set of negative output vectors:
/// `-ln s(pos . v) - sum ln s(-neg . v)`.
pub fn sgns_loss(v: &[f64], pos: &[f64], negs: &[&[f64]]) -> f64 {
    let mut loss = -sigmoid(dot(pos, v)).ln();
    for n in negs {
        loss -= sigmoid(-dot(n, v)).ln();
    }
    loss
}

/// Gradients of [`sgns_loss`] with respect to `v`, `pos` and each negative.
pub fn sgns_gradients(v: &[f64], pos: &[f64], negs: &[&[f64]]) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let gp = sigmoid(dot(pos, v)) - 1.0;
    let mut grad_v: Vec<f64> = pos.iter().map(|p| gp * p).collect();
    let grad_pos = v.iter().map(|x| gp * x).collect();
    let mut grad_negs = Vec::with_capacity(negs.len());
    for n in negs {
        let gn = sigmoid(dot(n, v));
        for (g, x) in grad_v.iter_mut().zip(n.iter()) {
            *g += gn * x;
        }
        grad_negs.push(v.iter().map(|x| gn * x).collect());
    }
    (grad_v, grad_pos, grad_negs)
}

struct NegativeTable {
    cumulative: Vec<f64>,
}

impl NegativeTable {
    fn new(counts: &[u64]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn sample(&self, rng: &mut SplitMix64) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let u = rng.next_f64() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

struct Trainer<'a> {
    cfg: &'a EmbedTrainConfig,
    emb: EmbeddingMatrix,
    table: NegativeTable,
    rng: SplitMix64,
    hidden_grad: Vec<f64>,
}

impl Trainer<'_> {
    /// One descent step of the negative-sampling loss for input vector `h`
    /// against output row `target`. Accumulates the input gradient into
    /// `hidden_grad` and updates output rows in place.
    fn step(&mut self, h: &[f64], target: usize, lr: f64) {
        let d = self.emb.dim;
        for k in 0..=self.cfg.negatives {
            let (row, label) = if k == 0 {
                (target, 1.0)
            } else {
                let n = self.table.sample(&mut self.rng);
                if n == target {
                    continue;
                }
                (n, 0.0)
            };
            let out = &mut self.emb.context_vectors[row * d..(row + 1) * d];
            let g = (label - sigmoid(dot(out, h))) * lr;
            for i in 0..d {
                self.hidden_grad[i] += g * out[i];
                out[i] += g * h[i];
            }
        }
    }
}

/// Train embeddings over cleaned token lists.
pub fn train_embeddings<S: AsRef<str>>(docs: &[Vec<S>], cfg: &EmbedTrainConfig) -> Result<EmbeddingMatrix> {
    cfg.validate()?;
    let mut freq: IndexMap<&str, u64> = IndexMap::new();
    for doc in docs {
        for t in doc {
            *freq.entry(t.as_ref()).or_default() += 1;
        }
    }
    let mut entries: Vec<(&str, u64)> = freq.into_iter().filter(|e| e.1 >= cfg.min_count).collect();
    if entries.is_empty() {
        return Err(Error::invalid("empty embedding vocabulary"));
    }
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let vocab: IndexMap<String, usize> = entries.iter().enumerate().map(|(i, e)| (e.0.to_string(), i)).collect();
    let counts: Vec<u64> = entries.iter().map(|e| e.1).collect();

    let d = cfg.dim;
    let mut rng = SplitMix64::new(cfg.seed);
    let vectors = (0..vocab.len() * d).map(|_| rng.uniform(-0.5 / d as f64, 0.5 / d as f64)).collect();
    let emb = EmbeddingMatrix {
        vocab,
        dim: d,
        vectors,
        context_vectors: vec![0.0; counts.len() * d],
    };
    let ids: Vec<Vec<usize>> = docs
        .iter()
        .map(|doc| doc.iter().filter_map(|t| emb.vocab.get(t.as_ref()).copied()).collect())
        .collect();
    let total: usize = ids.iter().map(Vec::len).sum::<usize>() * cfg.epochs;
    let mut tr = Trainer {
        cfg,
        emb,
        table: NegativeTable::new(&counts),
        rng,
        hidden_grad: vec![0.0; d],
    };

    let mut seen = 0usize;
    let mut h = vec![0.0; d];
    for _ in 0..cfg.epochs {
        for sent in &ids {
            for (pos, &word) in sent.iter().enumerate() {
                let progress = seen as f64 / total.max(1) as f64;
                let lr = (cfg.initial_lr - (cfg.initial_lr - cfg.min_lr) * progress).max(cfg.min_lr);
                seen += 1;
                let lo = pos.saturating_sub(cfg.window);
                let hi = (pos + cfg.window + 1).min(sent.len());
                let context = (lo..hi).filter(|&c| c != pos).map(|c| sent[c]);
                match cfg.mode {
                    EmbedMode::Skipgram => {
                        for ctx in context {
                            h.copy_from_slice(&tr.emb.vectors[word * d..(word + 1) * d]);
                            tr.hidden_grad.iter_mut().for_each(|g| *g = 0.0);
                            tr.step(&h, ctx, lr);
                            let v = &mut tr.emb.vectors[word * d..(word + 1) * d];
                            v.iter_mut().zip(&tr.hidden_grad).for_each(|(x, g)| *x += g);
                        }
                    }
                    EmbedMode::Cbow => {
                        let ctx: Vec<usize> = context.collect();
                        if ctx.is_empty() {
                            continue;
                        }
                        h.iter_mut().for_each(|x| *x = 0.0);
                        for &c in &ctx {
                            let v = &tr.emb.vectors[c * d..(c + 1) * d];
                            h.iter_mut().zip(v).for_each(|(x, y)| *x += y);
                        }
                        h.iter_mut().for_each(|x| *x /= ctx.len() as f64);
                        tr.hidden_grad.iter_mut().for_each(|g| *g = 0.0);
                        tr.step(&h, word, lr);
                        for &c in &ctx {
                            let v = &mut tr.emb.vectors[c * d..(c + 1) * d];
                            v.iter_mut().zip(&tr.hidden_grad).for_each(|(x, g)| *x += g);
                        }
                    }
                }
            }
        }
    }
    Ok(tr.emb)
}

impl EmbeddingMatrix {
    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.vocab
            .get(token)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.vector(a)?, self.vector(b)?);
        Some(dot(x, y) / (dot(x, x).sqrt() * dot(y, y).sqrt()))
    }

    /// Text vector format: a `|V| d` header line, then `token v1 .. vd`.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (token, &i) in &self.vocab {
            write!(w, "{token}")?;
            for v in &self.vectors[i * self.dim..(i + 1) * self.dim] {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save_text(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_text(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Read the text vector format. Context vectors are not stored and come
    /// back as zeros.
    pub fn load_text(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let parse = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = std::io::BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| parse(1, "missing header".into()))?
            .map_err(|e| Error::io(path, e))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| parse(1, format!("bad header {header:?}"))))
            .collect::<Result<_>>()?;
        let [n, dim] = dims[..] else {
            return Err(parse(1, format!("bad header {header:?}")));
        };
        let mut vocab = IndexMap::with_capacity(n);
        let mut vectors = Vec::with_capacity(n * dim);
        for (k, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let mut parts = line.split(' ');
            let token = parts.next().unwrap_or_default().to_string();
            let before = vectors.len();
            for p in parts {
                vectors.push(p.parse::<f64>().map_err(|_| parse(k + 2, format!("bad value {p:?}")))?);
            }
            if vectors.len() - before != dim {
                return Err(parse(k + 2, format!("expected {dim} values")));
            }
            let id = vocab.len();
            vocab.insert(token, id);
        }
        if vocab.len() != n {
            return Err(parse(1, format!("header declares {n} rows, found {}", vocab.len())));
        }
        Ok(Self {
            vocab,
            dim,
            context_vectors: vec![0.0; vectors.len()],
            vectors,
        })
    }
}

/// Mean of the in-vocabulary token vectors; zeros when there are none.
pub fn doc_vector<S: AsRef<str>>(tokens: &[S], emb: &EmbeddingMatrix) -> Vec<f64> {
    let mut out = vec![0.0; emb.dim];
    let mut n = 0usize;
    for t in tokens {
        if let Some(v) = emb.vector(t.as_ref()) {
            out.iter_mut().zip(v).for_each(|(o, x)| *o += x);
            n += 1;
        }
    }
    if n > 0 {
        out.iter_mut().for_each(|o| *o /= n as f64);
    }
    out
}
