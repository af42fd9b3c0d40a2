//! File names and small read/write helpers shared by the subcommands.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use sentio_core::corpus::{load_csv, write_csv};
use sentio_core::{Corpus, Record, SentimentLabel};

use crate::error::{CliError, Result};

pub const CONFIG: &str = "config.json";
pub const CLEANED: &str = "cleaned.csv";
pub const LENGTH_STATS: &str = "length_stats.csv";
pub const SPLIT_MANIFEST: &str = "split_manifest.json";
pub const SPLITS: [&str; 3] = ["train", "val", "test"];
pub const VOCAB: &str = "vocab.json";
pub const FEATURES_META: &str = "features.json";
pub const LABELS: &str = "labels.json";
pub const NB_MODEL: &str = "nb_model.json";
pub const CHECKPOINT: &str = "model.tensors";
pub const SEQUENCE_VOCAB: &str = "sequence_vocab.json";
pub const HISTORY: &str = "history.json";
pub const HISTORY_CSV: &str = "history.csv";
pub const PREDICTIONS: &str = "predictions.json";
pub const EMBEDDINGS: &str = "embeddings.txt";
pub const ENCODINGS_JSONL: &str = "encodings.jsonl";
pub const ENCODINGS_TENSORS: &str = "encodings.tensors";
pub const LENGTH_FILTER: &str = "length_filter.json";
pub const REPORT: &str = "report.json";

pub fn split_csv(name: &str) -> String {
    format!("{name}.csv")
}

pub fn features_file(split: &str) -> String {
    format!("{split}.features")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::data(format!("{}: {e}", path.display()))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| io_err(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).map_err(|e| io_err(path, e))
}

pub fn write_records<'a>(path: &Path, records: impl IntoIterator<Item = &'a Record>) -> Result<()> {
    write_csv(create(path)?, records)?;
    Ok(())
}

pub fn read_corpus(path: &Path) -> Result<Corpus> {
    Ok(load_csv(path)?)
}

/// Whitespace tokens of cleaned text.
pub fn tokens(corpus: &Corpus) -> Vec<Vec<String>> {
    corpus
        .iter()
        .map(|r| r.text.split_whitespace().map(str::to_string).collect())
        .collect()
}

/// `dir/<split>.csv` for each split that exists, in train/val/test order.
pub fn read_splits(dir: &Path) -> Result<Vec<(&'static str, Corpus)>> {
    let mut out = Vec::new();
    for name in SPLITS {
        let p = dir.join(split_csv(name));
        if p.exists() {
            out.push((name, read_corpus(&p)?));
        }
    }
    if out.first().map(|s| s.0) != Some("train") {
        return Err(CliError::data(format!("{}: no {} found", dir.display(), split_csv("train"))));
    }
    Ok(out)
}

/// The split predictions are reported on: test when present, else val.
pub fn held_out<'a, T>(splits: &'a [(&'static str, T)]) -> Option<&'a (&'static str, T)> {
    splits
        .iter()
        .find(|s| s.0 == "test")
        .or_else(|| splits.iter().find(|s| s.0 == "val"))
}

/// Held-out predictions of one trained model, the input of `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionFile {
    pub model: String,
    pub split: String,
    pub labels: Vec<SentimentLabel>,
    pub predicted: Vec<SentimentLabel>,
    /// Positive-class probability.
    pub scores: Vec<f64>,
}

/// Input of `report --from`: paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunManifest {
    /// Cleaned `text,sentiment` CSV for the corpus statistics.
    pub corpus: Option<PathBuf>,
    /// `report.json` files written by `evaluate`, or their directories.
    pub evaluations: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitManifest {
    pub seed: u64,
    pub records: usize,
    pub fractions: Vec<(String, f64)>,
    pub sizes: IndexMap<String, usize>,
    /// Source row indices of each split, in output order.
    pub indices: IndexMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturesMeta {
    /// `counts` (u32 matrices) or `tfidf` (f64 matrices).
    pub kind: String,
    pub ngram_range: (usize, usize),
    pub features: usize,
    pub splits: Vec<String>,
}
