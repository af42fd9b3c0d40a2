//! Confusion matrices, classification reports and the corpus/training
//! series behind the report figures.
//!
//! Metrics whose denominator is zero are reported as 0 and listed in the
//! report's `warnings`. Printed tables round half up to two decimals; the
//! JSON keeps raw values.
//!
//! The JSON layout is described in `docs/report_schema.md`; bump
//! [`SCHEMA_VERSION`] when it changes.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::SentimentLabel;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const HISTOGRAM_BINS: usize = 50;
pub const DENSITY_POINTS: usize = 256;

/// Round half up to `dp` decimals. A small epsilon absorbs binary
/// representation error so that e.g. 0.835 renders as 0.84.
pub fn round_half_up(x: f64, dp: u32) -> f64 {
    let scale = 10f64.powi(dp as i32);
    (x * scale + 0.5 + 1e-9).floor() / scale
}

fn fmt2(x: f64) -> String {
    format!("{:.2}", round_half_up(x, 2))
}

fn ratio(num: f64, den: f64, what: &str, warnings: &mut Vec<String>) -> f64 {
    if den == 0.0 {
        warnings.push(format!("{what} is undefined (0/0); reported as 0"));
        0.0
    } else {
        num / den
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Counts with Positive as the positive class. As a table, rows are the
/// predicted class and columns the actual class: `[[tp, fp], [fn, tn]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Predicted rows, actual columns, positive first.
    pub fn table(&self) -> [[u64; 2]; 2] {
        [[self.tp, self.fp], [self.fn_, self.tn]]
    }

    /// The same counts with Negative treated as the positive class.
    pub fn flipped(&self) -> Self {
        Self {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

fn check_codes<L: Copy + Into<u8>>(y_true: &[L], y_pred: &[L]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Dimension {
            expected: y_true.len(),
            found: y_pred.len(),
        });
    }
    if let Some(&bad) = y_true.iter().chain(y_pred).find(|&&l| l.into() > 1) {
        return Err(Error::Label(bad.into().to_string()));
    }
    Ok(())
}

pub fn confusion<L: Copy + Into<u8>>(y_true: &[L], y_pred: &[L]) -> Result<ConfusionMatrix> {
    check_codes(y_true, y_pred)?;
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t.into(), p.into()) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            _ => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn metrics(cm: &ConfusionMatrix) -> Metrics {
    let mut warnings = Vec::new();
    let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.fn_ as f64, cm.tn as f64);
    let accuracy = ratio(tp + tn, tp + tn + fp + fn_, "accuracy", &mut warnings);
    let precision = ratio(tp, tp + fp, "precision", &mut warnings);
    let recall = ratio(tp, tp + fn_, "recall", &mut warnings);
    Metrics {
        accuracy,
        precision,
        recall,
        f1: f1(precision, recall),
        warnings,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub classes: Vec<ClassRow>,
    /// Absent when the report was assembled from per-class figures only.
    pub accuracy: Option<f64>,
    pub macro_avg: AverageRow,
    pub weighted_avg: AverageRow,
    /// Pooled counts over all classes; equals accuracy for single-label data.
    pub micro_avg: Option<AverageRow>,
    /// Alias of `micro_avg`: per-sample averaging coincides with micro
    /// averaging when every sample carries exactly one label.
    pub samples_avg: Option<AverageRow>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ClassReport {
    /// Aggregate per-class `(label, precision, recall, support)` rows. F1 is
    /// derived per class from precision and recall.
    pub fn from_class_metrics<S: Into<String> + Clone>(rows: &[(S, f64, f64, u64)]) -> Self {
        let classes: Vec<ClassRow> = rows
            .iter()
            .map(|(label, p, r, s)| ClassRow {
                label: label.clone().into(),
                precision: *p,
                recall: *r,
                f1: f1(*p, *r),
                support: *s,
            })
            .collect();
        let mut warnings = Vec::new();
        let (macro_avg, weighted_avg) = averages(&classes, &mut warnings);
        Self {
            classes,
            accuracy: None,
            macro_avg,
            weighted_avg,
            micro_avg: None,
            samples_avg: None,
            warnings,
        }
    }

    pub fn row(&self, label: &str) -> Option<&ClassRow> {
        self.classes.iter().find(|c| c.label == label)
    }

    /// Plain-text table with values rounded half up to two decimals.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>14} {:>9} {:>9} {:>9} {:>9}", "", "precision", "recall", "f1-score", "support");
        for c in &self.classes {
            let _ = writeln!(
                out,
                "{:>14} {:>9} {:>9} {:>9} {:>9}",
                c.label,
                fmt2(c.precision),
                fmt2(c.recall),
                fmt2(c.f1),
                c.support
            );
        }
        let total = self.macro_avg.support;
        if let Some(acc) = self.accuracy {
            let _ = writeln!(out, "{:>14} {:>9} {:>9} {:>9} {:>9}", "accuracy", "", "", fmt2(acc), total);
        }
        let mut avg = |name: &str, r: &AverageRow| {
            let _ = writeln!(
                out,
                "{:>14} {:>9} {:>9} {:>9} {:>9}",
                name,
                fmt2(r.precision),
                fmt2(r.recall),
                fmt2(r.f1),
                r.support
            );
        };
        if let Some(m) = &self.micro_avg {
            avg("micro avg", m);
        }
        avg("macro avg", &self.macro_avg);
        avg("weighted avg", &self.weighted_avg);
        if let Some(s) = &self.samples_avg {
            avg("samples avg", s);
        }
        out
    }
}

fn averages(classes: &[ClassRow], warnings: &mut Vec<String>) -> (AverageRow, AverageRow) {
    let k = classes.len() as f64;
    let total: u64 = classes.iter().map(|c| c.support).sum();
    let mean = |f: fn(&ClassRow) -> f64, w: &mut Vec<String>| ratio(classes.iter().map(f).sum(), k, "macro average", w);
    let macro_avg = AverageRow {
        precision: mean(|c| c.precision, warnings),
        recall: mean(|c| c.recall, warnings),
        f1: mean(|c| c.f1, warnings),
        support: total,
    };
    let wmean = |f: fn(&ClassRow) -> f64, w: &mut Vec<String>| {
        ratio(
            classes.iter().map(|c| c.support as f64 * f(c)).sum(),
            total as f64,
            "weighted average",
            w,
        )
    };
    let weighted_avg = AverageRow {
        precision: wmean(|c| c.precision, warnings),
        recall: wmean(|c| c.recall, warnings),
        f1: wmean(|c| c.f1, warnings),
        support: total,
    };
    (macro_avg, weighted_avg)
}

/// Per-class rows for Negative and Positive (each in turn the positive
/// class), accuracy, and macro/weighted/micro averages.
pub fn classification_report<L: Copy + Into<u8>>(y_true: &[L], y_pred: &[L]) -> Result<ClassReport> {
    let cm = confusion(y_true, y_pred)?;
    let mut warnings = Vec::new();
    let mut classes = Vec::new();
    for label in SentimentLabel::ALL {
        let view = if label == SentimentLabel::Positive { cm } else { cm.flipped() };
        let (tp, fp, fn_) = (view.tp as f64, view.fp as f64, view.fn_ as f64);
        let precision = ratio(tp, tp + fp, &format!("precision of {}", label.name()), &mut warnings);
        let recall = ratio(tp, tp + fn_, &format!("recall of {}", label.name()), &mut warnings);
        classes.push(ClassRow {
            label: label.name().to_string(),
            precision,
            recall,
            f1: f1(precision, recall),
            support: view.tp + view.fn_,
        });
    }
    let (macro_avg, weighted_avg) = averages(&classes, &mut warnings);
    let total = cm.total();
    let correct = (cm.tp + cm.tn) as f64;
    let accuracy = ratio(correct, total as f64, "accuracy", &mut warnings);
    // pooled over both classes: every error is one FP for one class and one
    // FN for the other
    let micro = AverageRow {
        precision: accuracy,
        recall: accuracy,
        f1: accuracy,
        support: total,
    };
    Ok(ClassReport {
        classes,
        accuracy: Some(accuracy),
        macro_avg,
        weighted_avg,
        micro_avg: Some(micro.clone()),
        samples_avg: Some(micro),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub token: String,
    pub count: u64,
}

fn ranked(counts: HashMap<&str, u64>, top_k: Option<usize>) -> Vec<FrequencyRow> {
    let mut rows: Vec<FrequencyRow> = counts
        .into_iter()
        .map(|(t, c)| FrequencyRow {
            token: t.to_string(),
            count: c,
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.token.cmp(&b.token)));
    if let Some(k) = top_k {
        rows.truncate(k);
    }
    rows
}

/// Token counts, descending, ties in lexicographic order.
pub fn frequency_table<S: AsRef<str>>(docs: &[Vec<S>], top_k: Option<usize>) -> Vec<FrequencyRow> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for t in docs.iter().flatten() {
        *counts.entry(t.as_ref()).or_default() += 1;
    }
    ranked(counts, top_k)
}

/// Token frequencies within each sentiment class, keyed by class name.
pub fn word_weights<S: AsRef<str>>(
    docs: &[(Vec<S>, SentimentLabel)],
    top_k: Option<usize>,
) -> BTreeMap<String, Vec<FrequencyRow>> {
    SentimentLabel::ALL
        .iter()
        .map(|&label| {
            let mut counts: HashMap<&str, u64> = HashMap::new();
            for (tokens, _) in docs.iter().filter(|d| d.1 == label) {
                for t in tokens {
                    *counts.entry(t.as_ref()).or_default() += 1;
                }
            }
            (label.name().to_string(), ranked(counts, top_k))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionRow {
    pub label: String,
    pub count: u64,
    pub proportion: f64,
}

pub fn sentiment_proportions(labels: &[SentimentLabel]) -> Vec<ProportionRow> {
    let n = labels.len() as f64;
    SentimentLabel::ALL
        .iter()
        .map(|&l| {
            let count = labels.iter().filter(|&&x| x == l).count() as u64;
            ProportionRow {
                label: l.name().to_string(),
                count,
                proportion: if n > 0.0 { count as f64 / n } else { 0.0 },
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    /// `bins + 1` edges; the last bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n: u64,
}

pub fn histogram(name: &str, x_label: &str, values: &[f64], bins: usize) -> Histogram {
    let mut h = Histogram {
        name: name.to_string(),
        x_label: x_label.to_string(),
        y_label: "count".to_string(),
        edges: Vec::new(),
        counts: Vec::new(),
        n: values.len() as u64,
    };
    if values.is_empty() || bins == 0 {
        return h;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo == hi { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
    let width = (hi - lo) / bins as f64;
    h.edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    h.edges[bins] = hi;
    h.counts = vec![0; bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        h.counts[b] += 1;
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub bandwidth: f64,
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub n: u64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Silverman's rule `0.9 * min(sd, IQR / 1.34) * n^(-1/5)`, falling back to
/// the larger spread measure, then 1, when the smaller one is zero.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 1.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = (quantile(&sorted, 0.75) - quantile(&sorted, 0.25)) / 1.34;
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr),
        (true, false) => sd,
        (false, true) => iqr,
        (false, false) => return 1.0,
    };
    0.9 * spread * n.powf(-0.2)
}

/// Gaussian kernel density sampled at [`DENSITY_POINTS`] points spanning
/// three bandwidths beyond the data range.
pub fn density(name: &str, x_label: &str, values: &[f64]) -> Density {
    let mut d = Density {
        name: name.to_string(),
        x_label: x_label.to_string(),
        y_label: "density".to_string(),
        bandwidth: 0.0,
        x: Vec::new(),
        density: Vec::new(),
        n: values.len() as u64,
    };
    if values.is_empty() {
        return d;
    }
    let h = silverman_bandwidth(values);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let step = (hi - lo) / (DENSITY_POINTS - 1) as f64;
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    d.bandwidth = h;
    d.x = (0..DENSITY_POINTS).map(|i| lo + step * i as f64).collect();
    d.density = d
        .x
        .iter()
        .map(|&x| norm * values.iter().map(|&v| (-0.5 * ((x - v) / h).powi(2)).exp()).sum::<f64>())
        .collect();
    d
}

/// Mean token length in characters; `None` for a record without tokens.
pub fn average_word_length<S: AsRef<str>>(tokens: &[S]) -> Option<f64> {
    if tokens.is_empty() {
        return None;
    }
    let total: usize = tokens.iter().map(|t| t.as_ref().chars().count()).sum();
    Some(total as f64 / tokens.len() as f64)
}

/// One record as seen by [`distribution_series`].
pub struct TextStats<'a> {
    pub text: &'a str,
    pub tokens: &'a [String],
    pub label: SentimentLabel,
}

/// Character-length and word-count histograms (overall and per class) and
/// per-class densities of average word length.
pub fn distribution_series(records: &[TextStats<'_>]) -> (Vec<Histogram>, Vec<Density>) {
    let mut hists = Vec::new();
    let mut dens = Vec::new();
    let groups: Vec<(String, Vec<&TextStats<'_>>)> = std::iter::once(("all".to_string(), records.iter().collect()))
        .chain(SentimentLabel::ALL.iter().map(|&l| {
            (
                l.name().to_string(),
                records.iter().filter(|r| r.label == l).collect(),
            )
        }))
        .collect();
    for (name, group) in &groups {
        let chars: Vec<f64> = group.iter().map(|r| r.text.chars().count() as f64).collect();
        let words: Vec<f64> = group.iter().map(|r| r.tokens.len() as f64).collect();
        hists.push(histogram(&format!("char_length_{name}"), "characters per text", &chars, HISTOGRAM_BINS));
        hists.push(histogram(&format!("word_count_{name}"), "words per text", &words, HISTOGRAM_BINS));
        if name != "all" {
            let avg: Vec<f64> = group.iter().filter_map(|r| average_word_length(r.tokens)).collect();
            dens.push(density(&format!("avg_word_length_{name}"), "average word length", &avg));
        }
    }
    (hists, dens)
}

/// One row of a training history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub acc: f64,
    pub val_loss: Option<f64>,
    pub val_acc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub model: String,
    pub epochs: Vec<EpochRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonBar {
    pub model: String,
    pub accuracy: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub report: Option<ClassReport>,
    pub confusion: Option<ConfusionMatrix>,
    pub proportions: Vec<ProportionRow>,
    pub frequency: Vec<FrequencyRow>,
    pub word_weights: BTreeMap<String, Vec<FrequencyRow>>,
    pub histograms: Vec<Histogram>,
    pub densities: Vec<Density>,
    pub learning_curves: Vec<LearningCurve>,
    pub comparison: Vec<ComparisonBar>,
}

impl Default for ReportBundle {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            report: None,
            confusion: None,
            proportions: Vec::new(),
            frequency: Vec::new(),
            word_weights: BTreeMap::new(),
            histograms: Vec::new(),
            densities: Vec::new(),
            learning_curves: Vec::new(),
            comparison: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            _ => Err(Error::invalid(format!("unknown report format {s:?}"))),
        }
    }
}

fn write_file(path: &Path, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    written.push(path.to_path_buf());
    Ok(())
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let map = |e: csv::Error| Error::invalid(e.to_string());
    w.write_record(header).map_err(map)?;
    for r in rows {
        w.write_record(&r).map_err(map)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Write the bundle to `out_dir` in the requested formats and return the
/// files written, in a fixed order. `report.json` is always the complete
/// record; CSV and SVG files are views of it.
pub fn emit(bundle: &ReportBundle, out_dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    for f in formats {
        match f {
            Format::Json => {
                let json = serde_json::to_string_pretty(bundle)? + "\n";
                write_file(&out_dir.join("report.json"), &json, &mut written)?;
            }
            Format::Csv => emit_csv(bundle, out_dir, &mut written)?,
            Format::Svg => emit_svg(bundle, out_dir, &mut written)?,
        }
    }
    Ok(written)
}

fn emit_csv(b: &ReportBundle, dir: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    if let Some(r) = &b.report {
        let mut rows: Vec<Vec<String>> = r
            .classes
            .iter()
            .map(|c| vec![c.label.clone(), c.precision.to_string(), c.recall.to_string(), c.f1.to_string(), c.support.to_string()])
            .collect();
        let avg = |name: &str, a: &AverageRow| {
            vec![name.to_string(), a.precision.to_string(), a.recall.to_string(), a.f1.to_string(), a.support.to_string()]
        };
        if let Some(acc) = r.accuracy {
            rows.push(vec!["accuracy".into(), String::new(), String::new(), acc.to_string(), r.macro_avg.support.to_string()]);
        }
        if let Some(m) = &r.micro_avg {
            rows.push(avg("micro avg", m));
        }
        rows.push(avg("macro avg", &r.macro_avg));
        rows.push(avg("weighted avg", &r.weighted_avg));
        if let Some(s) = &r.samples_avg {
            rows.push(avg("samples avg", s));
        }
        let text = csv_string(&["class", "precision", "recall", "f1", "support"], rows)?;
        write_file(&dir.join("classification_report.csv"), &text, written)?;
    }
    if let Some(cm) = &b.confusion {
        let t = cm.table();
        let text = csv_string(
            &["predicted", "actual_positive", "actual_negative"],
            [
                vec!["positive".into(), t[0][0].to_string(), t[0][1].to_string()],
                vec!["negative".into(), t[1][0].to_string(), t[1][1].to_string()],
            ],
        )?;
        write_file(&dir.join("confusion.csv"), &text, written)?;
    }
    if !b.proportions.is_empty() {
        let rows = b
            .proportions
            .iter()
            .map(|p| vec![p.label.clone(), p.count.to_string(), p.proportion.to_string()]);
        write_file(&dir.join("proportions.csv"), &csv_string(&["label", "count", "proportion"], rows)?, written)?;
    }
    if !b.frequency.is_empty() {
        let rows = b.frequency.iter().map(|f| vec![f.token.clone(), f.count.to_string()]);
        write_file(&dir.join("frequency.csv"), &csv_string(&["token", "count"], rows)?, written)?;
    }
    for (label, list) in &b.word_weights {
        let rows = list.iter().map(|f| vec![f.token.clone(), f.count.to_string()]);
        write_file(&dir.join(format!("word_weights_{label}.csv")), &csv_string(&["token", "weight"], rows)?, written)?;
    }
    for h in &b.histograms {
        let rows = h
            .counts
            .iter()
            .enumerate()
            .map(|(i, c)| vec![h.edges[i].to_string(), h.edges[i + 1].to_string(), c.to_string()]);
        write_file(&dir.join(format!("hist_{}.csv", h.name)), &csv_string(&["lower", "upper", "count"], rows)?, written)?;
    }
    for d in &b.densities {
        let rows = d.x.iter().zip(&d.density).map(|(x, y)| vec![x.to_string(), y.to_string()]);
        write_file(&dir.join(format!("density_{}.csv", d.name)), &csv_string(&["x", "density"], rows)?, written)?;
    }
    for lc in &b.learning_curves {
        let rows = lc.epochs.iter().map(|e| {
            vec![e.epoch.to_string(), e.loss.to_string(), e.acc.to_string(), opt(e.val_loss), opt(e.val_acc)]
        });
        let text = csv_string(&["epoch", "loss", "acc", "val_loss", "val_acc"], rows)?;
        write_file(&dir.join(format!("learning_{}.csv", lc.model)), &text, written)?;
    }
    if !b.comparison.is_empty() {
        let rows = b
            .comparison
            .iter()
            .map(|c| vec![c.model.clone(), c.accuracy.to_string(), c.n.to_string()]);
        write_file(&dir.join("comparison.csv"), &csv_string(&["model", "accuracy", "n"], rows)?, written)?;
    }
    Ok(())
}

fn emit_svg(b: &ReportBundle, dir: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    if !b.proportions.is_empty() {
        let bars: Vec<(String, f64)> = b.proportions.iter().map(|p| (p.label.clone(), p.proportion)).collect();
        let svg = svg::bar_chart("Sentiment proportions", "sentiment", "proportion", &bars);
        write_file(&dir.join("proportions.svg"), &svg, written)?;
    }
    if !b.comparison.is_empty() {
        let bars: Vec<(String, f64)> = b.comparison.iter().map(|c| (c.model.clone(), c.accuracy)).collect();
        let svg = svg::bar_chart("Model comparison", "model", "accuracy", &bars);
        write_file(&dir.join("comparison.svg"), &svg, written)?;
    }
    if !b.frequency.is_empty() {
        let bars: Vec<(String, f64)> = b.frequency.iter().take(20).map(|f| (f.token.clone(), f.count as f64)).collect();
        let svg = svg::bar_chart("Most frequent tokens", "token", "count", &bars);
        write_file(&dir.join("frequency.svg"), &svg, written)?;
    }
    for h in b.histograms.iter().filter(|h| !h.counts.is_empty()) {
        let svg = svg::histogram(&h.name, &h.x_label, &h.y_label, &h.edges, &h.counts);
        write_file(&dir.join(format!("hist_{}.svg", h.name)), &svg, written)?;
    }
    for d in b.densities.iter().filter(|d| !d.x.is_empty()) {
        let pts: Vec<(f64, f64)> = d.x.iter().copied().zip(d.density.iter().copied()).collect();
        let svg = svg::line_chart(&d.name, &d.x_label, &d.y_label, &[(d.name.clone(), pts)]);
        write_file(&dir.join(format!("density_{}.svg", d.name)), &svg, written)?;
    }
    for lc in b.learning_curves.iter().filter(|l| !l.epochs.is_empty()) {
        let series = |f: &dyn Fn(&EpochRecord) -> Option<f64>| -> Vec<(f64, f64)> {
            lc.epochs.iter().filter_map(|e| f(e).map(|y| (e.epoch as f64, y))).collect()
        };
        let acc = vec![("acc".to_string(), series(&|e| Some(e.acc))), ("val_acc".to_string(), series(&|e| e.val_acc))];
        let loss = vec![("loss".to_string(), series(&|e| Some(e.loss))), ("val_loss".to_string(), series(&|e| e.val_loss))];
        let acc: Vec<_> = acc.into_iter().filter(|s| !s.1.is_empty()).collect();
        let loss: Vec<_> = loss.into_iter().filter(|s| !s.1.is_empty()).collect();
        let title = format!("{} accuracy", lc.model);
        write_file(&dir.join(format!("learning_{}_acc.svg", lc.model)), &svg::line_chart(&title, "epoch", "accuracy", &acc), written)?;
        let title = format!("{} loss", lc.model);
        write_file(&dir.join(format!("learning_{}_loss.svg", lc.model)), &svg::line_chart(&title, "epoch", "loss", &loss), written)?;
    }
    Ok(())
}

/// Minimal static SVG 1.1 charts.
pub mod svg {
    use std::fmt::Write as _;

    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const BOTTOM: f64 = 70.0;
    const COLORS: [&str; 4] = ["#4c72b0", "#dd8452", "#55a868", "#c44e52"];

    fn esc(s: &str) -> String {
        s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
    }

    /// Evenly spaced ticks on 1/2/5 x 10^k steps covering `[lo, hi]`.
    pub fn ticks(lo: f64, hi: f64) -> Vec<f64> {
        if !(hi > lo) {
            return vec![lo];
        }
        let raw = (hi - lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let start = (lo / step).ceil() as i64;
        let end = (hi / step + 1e-9).floor() as i64;
        (start..=end).map(|i| i as f64 * step).collect()
    }

    fn tick_label(v: f64) -> String {
        let s = format!("{:.4}", v);
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    }

    struct Frame {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
    }

    impl Frame {
        fn px(&self, x: f64) -> f64 {
            LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
        }

        fn py(&self, y: f64) -> f64 {
            H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
        }
    }

    fn open(out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let _ = write!(
            out,
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
             <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
             <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n\
             <text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {})\">{}</text>\n",
            W / 2.0,
            esc(title),
            LEFT + (W - LEFT - RIGHT) / 2.0,
            H - 12.0,
            esc(x_label),
            TOP + (H - TOP - BOTTOM) / 2.0,
            TOP + (H - TOP - BOTTOM) / 2.0,
            esc(y_label)
        );
    }

    fn axes(out: &mut String, f: &Frame, x_ticks: bool) {
        let _ = writeln!(
            out,
            "<line x1=\"{LEFT}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{0}\" stroke=\"black\"/>",
            H - BOTTOM,
            W - RIGHT
        );
        for t in ticks(f.y0, f.y1) {
            let y = f.py(t);
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{LEFT}\" y2=\"{y:.2}\" stroke=\"black\"/><text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
                LEFT - 4.0,
                LEFT - 6.0,
                y + 3.0,
                tick_label(t)
            );
        }
        if x_ticks {
            for t in ticks(f.x0, f.x1) {
                let x = f.px(t);
                let _ = writeln!(
                    out,
                    "<line x1=\"{x:.2}\" y1=\"{0}\" x2=\"{x:.2}\" y2=\"{1}\" stroke=\"black\"/><text x=\"{x:.2}\" y=\"{2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{3}</text>",
                    H - BOTTOM,
                    H - BOTTOM + 4.0,
                    H - BOTTOM + 16.0,
                    tick_label(t)
                );
            }
        }
    }

    fn y_max(values: impl Iterator<Item = f64>) -> f64 {
        let m = values.fold(0.0f64, f64::max);
        if m > 0.0 {
            *ticks(0.0, m * 1.05).last().filter(|&&t| t >= m).unwrap_or(&(m * 1.05))
        } else {
            1.0
        }
    }

    /// One bar per category, heights from zero.
    pub fn bar_chart(title: &str, x_label: &str, y_label: &str, bars: &[(String, f64)]) -> String {
        let mut out = String::new();
        open(&mut out, title, x_label, y_label);
        let f = Frame {
            x0: 0.0,
            x1: bars.len().max(1) as f64,
            y0: 0.0,
            y1: y_max(bars.iter().map(|b| b.1)),
        };
        axes(&mut out, &f, false);
        for (i, (label, v)) in bars.iter().enumerate() {
            let (xa, xb) = (f.px(i as f64 + 0.15), f.px(i as f64 + 0.85));
            let (ya, yb) = (f.py(*v), f.py(0.0));
            let _ = writeln!(
                out,
                "<rect class=\"bar\" x=\"{xa:.2}\" y=\"{ya:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/><text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
                xb - xa,
                yb - ya,
                COLORS[0],
                (xa + xb) / 2.0,
                H - BOTTOM + 14.0,
                esc(label)
            );
        }
        out.push_str("</svg>\n");
        out
    }

    /// Adjacent bars over numeric bin edges.
    pub fn histogram(title: &str, x_label: &str, y_label: &str, edges: &[f64], counts: &[u64]) -> String {
        let mut out = String::new();
        open(&mut out, title, x_label, y_label);
        let f = Frame {
            x0: edges[0],
            x1: edges[edges.len() - 1],
            y0: 0.0,
            y1: y_max(counts.iter().map(|&c| c as f64)),
        };
        axes(&mut out, &f, true);
        for (i, &c) in counts.iter().enumerate() {
            let (xa, xb) = (f.px(edges[i]), f.px(edges[i + 1]));
            let (ya, yb) = (f.py(c as f64), f.py(0.0));
            let _ = writeln!(
                out,
                "<rect class=\"bar\" x=\"{xa:.2}\" y=\"{ya:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\" stroke=\"white\" stroke-width=\"0.5\"/>",
                xb - xa,
                yb - ya,
                COLORS[0]
            );
        }
        out.push_str("</svg>\n");
        out
    }

    /// Polylines with a legend.
    pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
        let mut out = String::new();
        open(&mut out, title, x_label, y_label);
        let xs = series.iter().flat_map(|s| s.1.iter().map(|p| p.0));
        let x0 = xs.clone().fold(f64::INFINITY, f64::min);
        let x1 = xs.fold(f64::NEG_INFINITY, f64::max);
        let (x0, x1) = if x0.is_finite() && x1 > x0 { (x0, x1) } else { (x0.min(0.0), x0.max(0.0) + 1.0) };
        let f = Frame {
            x0,
            x1,
            y0: 0.0,
            y1: y_max(series.iter().flat_map(|s| s.1.iter().map(|p| p.1))),
        };
        axes(&mut out, &f, true);
        for (k, (name, pts)) in series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
            let _ = writeln!(
                out,
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" fill=\"{color}\">{}</text>",
                path.join(" "),
                W - RIGHT - 80.0,
                TOP + 12.0 * (k as f64 + 1.0),
                esc(name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_half_up(0.835, 2), 0.84);
        assert_eq!(round_half_up(0.8486, 2), 0.85);
        assert_eq!(round_half_up(0.825, 2), 0.83);
        assert_eq!(round_half_up(0.8249, 2), 0.82);
    }

    #[test]
    fn confusion_enumeration() {
        let cm = confusion(&[1u8, 1, 0, 0], &[1u8, 0, 0, 1]).unwrap();
        assert_eq!((cm.tp, cm.fn_, cm.tn, cm.fp), (1, 1, 1, 1));
        let cm = confusion(&[1u8, 1, 1, 0], &[1u8, 0, 0, 1]).unwrap();
        let swapped = confusion(&[1u8, 0, 0, 1], &[1u8, 1, 1, 0]).unwrap();
        assert_eq!((cm.fp, cm.fn_), (swapped.fn_, swapped.fp));
        assert!(confusion(&[1u8], &[]).is_err());
        assert!(confusion(&[2u8], &[1u8]).is_err());
        assert_eq!(cm.table(), [[1, 1], [2, 0]]);
    }

    #[test]
    fn metric_formulas() {
        let m = metrics(&ConfusionMatrix { tp: 2, fp: 1, fn_: 1, tn: 2 });
        for v in [m.accuracy, m.precision, m.recall, m.f1] {
            assert!((v - 2.0 / 3.0).abs() < 1e-15);
        }
        let m = metrics(&ConfusionMatrix { tp: 3, fp: 0, fn_: 0, tn: 4 });
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
        let m = metrics(&ConfusionMatrix { tp: 0, fp: 0, fn_: 2, tn: 1 });
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.warnings.len(), 1);
    }

    #[test]
    fn single_class_perfect() {
        use SentimentLabel::Positive;
        let r = classification_report(&[Positive; 5], &[Positive; 5]).unwrap();
        let p = r.row("positive").unwrap();
        assert_eq!((p.precision, p.recall, p.f1, p.support), (1.0, 1.0, 1.0, 5));
        assert_eq!(r.accuracy, Some(1.0));
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn aggregated_table() {
        let r = ClassReport::from_class_metrics(&[("negative", 0.93, 0.75, 14659), ("positive", 0.74, 0.92, 10984)]);
        assert!((r.weighted_avg.precision - 0.8486).abs() < 1e-4);
        assert_eq!(fmt2(r.weighted_avg.precision), "0.85");
        assert!((r.macro_avg.recall - 0.835).abs() < 1e-12);
        assert_eq!(fmt2(r.macro_avg.recall), "0.84");
        let text = r.render();
        assert!(text.contains("weighted avg"));
    }

    #[test]
    fn frequency_ties() {
        let docs = vec![vec!["b", "a", "c"], vec!["olympics", "olympics"]];
        let t = frequency_table(&docs, None);
        let order: Vec<&str> = t.iter().map(|r| r.token.as_str()).collect();
        assert_eq!(order, ["olympics", "a", "b", "c"]);
        assert_eq!(frequency_table(&docs, Some(2)).len(), 2);
    }

    #[test]
    fn weights_by_class() {
        let docs = vec![(vec!["x", "y", "x"], SentimentLabel::Positive)];
        let w = word_weights(&docs, None);
        assert!(w["negative"].is_empty());
        assert_eq!(w["positive"].iter().map(|r| r.count).sum::<u64>(), 3);
    }

    #[test]
    fn series() {
        assert_eq!(average_word_length(&["ab", "abcd"]), Some(3.0));
        assert_eq!(average_word_length::<&str>(&[]), None);
        let h = histogram("h", "x", &[1.0, 2.0, 2.0, 10.0], 50);
        assert_eq!(h.counts.iter().sum::<u64>(), 4);
        assert_eq!(h.edges.len(), 51);
        assert_eq!(h.counts[49], 1);
        let h = histogram("h", "x", &[3.0, 3.0], 50);
        assert_eq!(h.counts.iter().sum::<u64>(), 2);
        assert!(histogram("h", "x", &[], 50).counts.is_empty());
        let d = density("d", "x", &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(d.x.len(), DENSITY_POINTS);
        let step = d.x[1] - d.x[0];
        let area: f64 = d.density.iter().sum::<f64>() * step;
        assert!((area - 1.0).abs() < 0.01);
        assert!(density("d", "x", &[]).x.is_empty());
    }

    #[test]
    fn silverman() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        // sd = 1.5811, IQR/1.34 = 2/1.34 = 1.4925
        let h = silverman_bandwidth(&v);
        assert!((h - 0.9 * (2.0 / 1.34) * 5f64.powf(-0.2)).abs() < 1e-12);
    }

    #[test]
    fn nice_ticks() {
        let t = svg::ticks(0.0, 1.0);
        assert_eq!(t.len(), 6);
        assert!((t[3] - 0.6).abs() < 1e-12);
        assert_eq!(svg::ticks(0.0, 100.0), vec![0.0, 20.0, 40.0, 60.0, 80.0, 100.0]);
    }
}
