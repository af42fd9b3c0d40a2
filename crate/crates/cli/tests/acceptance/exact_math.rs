//! Document-term features against a dense brute-force evaluation on 1,000
//! random corpora, and naive Bayes log posteriors against Bayes' rule on
//! every corpus of at most 4 documents over at most 4 binary features.

use std::time::Instant;

use sentio_core::features::{count_transform, fit_vocab, inverse_document_frequency, term_frequency, tfidf_transform};
use sentio_core::nb::nb_fit;
use sentio_core::sparse::CsrMatrix;
use sentio_core::{SentimentLabel, SplitMix64};

use super::support::Verdict;

const CORPORA: usize = 1000;
const FEATURE_TOL: f64 = 1e-9;
const NB_TOL: f64 = 1e-12;

fn random_corpus(rng: &mut SplitMix64) -> (Vec<Vec<String>>, (usize, usize)) {
    let pool = 2 + rng.below(7);
    let n = 1 + rng.below(10);
    let range = if rng.below(2) == 0 { (1, 1) } else { (1, 2) };
    let docs = (0..n)
        .map(|_| {
            let len = rng.below(7);
            (0..len).map(|_| ((b'a' + rng.below(pool) as u8) as char).to_string()).collect()
        })
        .collect();
    (docs, range)
}

fn grams(doc: &[String], range: (usize, usize)) -> Vec<String> {
    let mut out = Vec::new();
    for n in range.0..=range.1 {
        for start in 0..doc.len() {
            if start + n <= doc.len() {
                out.push(doc[start..start + n].join(" "));
            }
        }
    }
    out
}

/// Returns the largest deviation from the dense evaluation, or a
/// description of the first exact (integer) disagreement.
fn check_features(docs: &[Vec<String>], range: (usize, usize)) -> Result<f64, String> {
    let vocab = fit_vocab(docs, range, None).map_err(|e| e.to_string())?;
    let counts = count_transform(docs, &vocab);
    let tf = term_frequency(&counts);
    let tfidf = tfidf_transform(&counts, &vocab).map_err(|e| e.to_string())?;
    let idf = inverse_document_frequency(&vocab);
    let g: Vec<Vec<String>> = docs.iter().map(|d| grams(d, range)).collect();
    let n = docs.len() as f64;
    let mut worst = 0.0f64;
    for (j, feat) in vocab.index.keys().enumerate() {
        let df = g.iter().filter(|x| x.contains(feat)).count();
        if vocab.df[j] != df as u64 {
            return Err(format!("df of {feat:?}: {} vs {df}", vocab.df[j]));
        }
        worst = worst.max((idf[j] - (n / df as f64).ln()).abs());
    }
    let all: std::collections::BTreeSet<&String> = g.iter().flatten().collect();
    if all.len() != vocab.len() {
        return Err(format!("{} features vs {} distinct n-grams", vocab.len(), all.len()));
    }
    for (i, row) in g.iter().enumerate() {
        let total = row.len() as f64;
        for (j, feat) in vocab.index.keys().enumerate() {
            let nij = row.iter().filter(|x| *x == feat).count();
            if counts.get(i, j) as usize != nij {
                return Err(format!("count ({i}, {feat:?}): {} vs {nij}", counts.get(i, j)));
            }
            let tf_ij = if total > 0.0 { nij as f64 / total } else { 0.0 };
            let w = tf_ij * (n / vocab.df[j] as f64).ln();
            worst = worst.max((tf.get(i, j) - tf_ij).abs()).max((tfidf.get(i, j) - w).abs());
        }
    }
    Ok(worst)
}

fn features() -> (Vec<(bool, String)>, String) {
    let mut rng = SplitMix64::new(0x5eed);
    let mut worst = 0.0f64;
    let mut done = 0;
    let mut checks = Vec::new();
    while done < CORPORA {
        let (docs, range) = random_corpus(&mut rng);
        if docs.iter().all(|d| d.is_empty()) {
            continue;
        }
        let distinct: std::collections::BTreeSet<String> = docs.iter().flat_map(|d| grams(d, range)).collect();
        if distinct.len() > 20 {
            continue;
        }
        match check_features(&docs, range) {
            Ok(w) => worst = worst.max(w),
            Err(e) => checks.push((false, format!("corpus {done}: {e}"))),
        }
        done += 1;
    }
    checks.push((worst < FEATURE_TOL, format!("feature deviation {worst:e} >= {FEATURE_TOL:e}")));
    (checks, format!("features: {CORPORA} corpora, max |err| {worst:.1e}"))
}

/// Bayes' rule over dense counts with add-one smoothing, in plain
/// probabilities; `None` for a class without documents.
fn posterior(train: &[Vec<u32>], labels: &[SentimentLabel], x: &[u32]) -> [Option<f64>; 2] {
    let w = x.len();
    let mut out = [None; 2];
    for c in SentimentLabel::ALL {
        let members: Vec<&Vec<u32>> = train.iter().zip(labels).filter(|p| *p.1 == c).map(|p| p.0).collect();
        if members.is_empty() {
            continue;
        }
        let total: u32 = members.iter().flat_map(|r| r.iter()).sum();
        let mut p = members.len() as f64 / train.len() as f64;
        for j in 0..w {
            let t: u32 = members.iter().map(|r| r[j]).sum();
            p *= ((t as f64 + 1.0) / (total as f64 + w as f64)).powi(x[j] as i32);
        }
        out[c.code() as usize] = Some(p);
    }
    out
}

fn to_csr(rows: &[Vec<u32>], w: usize) -> CsrMatrix<u32> {
    let sparse = rows
        .iter()
        .map(|r| r.iter().copied().enumerate().filter(|p| p.1 > 0).collect())
        .collect();
    CsrMatrix::from_rows(w, sparse).expect("valid rows")
}

fn naive_bayes() -> (Vec<(bool, String)>, String) {
    let mut checks = Vec::new();
    let (mut corpora, mut fitted, mut probes) = (0u64, 0u64, 0u64);
    let mut worst = 0.0f64;
    for w in 1..=4usize {
        let docs_per_pattern = 1u32 << w;
        for n in 1..=4usize {
            let patterns = (docs_per_pattern as u64).pow(n as u32);
            for code in 0..patterns {
                let mut c = code;
                let train: Vec<Vec<u32>> = (0..n)
                    .map(|_| {
                        let d = (c % docs_per_pattern as u64) as u32;
                        c /= docs_per_pattern as u64;
                        (0..w).map(|j| (d >> j) & 1).collect()
                    })
                    .collect();
                let x = to_csr(&train, w);
                for lab in 0..(1u32 << n) {
                    corpora += 1;
                    let labels: Vec<SentimentLabel> = (0..n)
                        .map(|i| if (lab >> i) & 1 == 1 { SentimentLabel::Positive } else { SentimentLabel::Negative })
                        .collect();
                    let single_class = lab == 0 || lab == (1 << n) - 1;
                    let model = match nb_fit(&x, &labels, 1.0) {
                        Ok(m) if !single_class => m,
                        Ok(_) => {
                            checks.push((false, format!("single-class corpus {code}/{lab} was accepted")));
                            continue;
                        }
                        Err(_) if single_class => continue,
                        Err(e) => {
                            checks.push((false, format!("fit failed: {e}")));
                            continue;
                        }
                    };
                    fitted += 1;
                    for probe in 0..docs_per_pattern {
                        let xv: Vec<u32> = (0..w).map(|j| (probe >> j) & 1).collect();
                        let cols: Vec<usize> = (0..w).filter(|&j| xv[j] == 1).collect();
                        let vals = vec![1u32; cols.len()];
                        let (label, scores) = model.predict_row(&cols, &vals).expect("in range");
                        let oracle = posterior(&train, &labels, &xv);
                        let (neg, pos) = (oracle[0].unwrap(), oracle[1].unwrap());
                        for (s, o) in scores.iter().zip([neg, pos]) {
                            worst = worst.max((s - o.ln()).abs());
                        }
                        let want = if pos > neg { SentimentLabel::Positive } else { SentimentLabel::Negative };
                        // exact oracle ties are decided by the rounding of two
                        // log sums; only clear margins must agree
                        if label != want && (pos.ln() - neg.ln()).abs() > 1e-9 {
                            checks.push((false, format!("label of probe {probe} on corpus {code}/{lab}")));
                        }
                        probes += 1;
                    }
                }
            }
        }
    }
    checks.truncate(20);
    checks.push((worst < NB_TOL, format!("nb log-posterior deviation {worst:e} >= {NB_TOL:e}")));
    (
        checks,
        format!("nb: {corpora} corpora ({fitted} with both classes), {probes} probes, max |err| {worst:.1e}"),
    )
}

pub fn run() -> Verdict {
    let start = Instant::now();
    let (mut checks, f) = features();
    let (nb, n) = naive_bayes();
    checks.extend(nb);
    let secs = start.elapsed().as_secs_f64();
    checks.push((secs < 30.0, format!("took {secs:.1}s, limit 30s")));
    Verdict::from_checks(&checks, format!("{f}; {n}"))
}
