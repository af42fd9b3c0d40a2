//! Pipeline configuration: a JSON file, then `--set key=value` overrides,
//! then `--seed`. Unknown keys are rejected and every value left at its
//! default is logged.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use sentio_core::embed::EmbedTrainConfig;
use sentio_core::evalreport::Format;
use sentio_core::textclean::{CleanConfig, StageToggles};
use sentio_core::SplitSpec;
use sentio_neural::archs::{BilstmSpec, CnnSpec};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Flows to every seeded stage.
    pub seed: u64,
    pub paths: PathsConfig,
    pub split: SplitConfig,
    pub clean: CleanSection,
    pub features: FeatureConfig,
    pub model: ModelConfig,
    pub bert: BertConfig,
    pub report: ReportConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            paths: PathsConfig::default(),
            split: SplitConfig::default(),
            clean: CleanSection::default(),
            features: FeatureConfig::default(),
            model: ModelConfig::default(),
            bert: BertConfig::default(),
            report: ReportConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub input: Option<PathBuf>,
    /// Cleaning lexicons; the bundled set when absent.
    pub lexicon_dir: Option<PathBuf>,
    /// WordPiece vocabulary, one token per line.
    pub vocab_file: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train: 0.70,
            val: 0.15,
            test: 0.15,
        }
    }
}

impl SplitConfig {
    pub fn spec(&self, seed: u64) -> SplitSpec {
        SplitSpec::new([("train", self.train), ("val", self.val), ("test", self.test)], seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanSection {
    pub min_words: usize,
    pub stages: StageToggles,
}

impl Default for CleanSection {
    fn default() -> Self {
        let d = CleanConfig::default();
        Self {
            min_words: d.min_words,
            stages: d.stages,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub ngram_range: (usize, usize),
    pub tfidf: bool,
    pub max_features: Option<usize>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            ngram_range: (1, 1),
            tfidf: false,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub nb: NbConfig,
    pub cnn: CnnSpec,
    pub bilstm: BilstmSpec,
    /// `seed` here is replaced by the pipeline seed.
    pub embed: EmbedTrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NbConfig {
    pub alpha: f64,
}

impl Default for NbConfig {
    fn default() -> Self {
        Self { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BertConfig {
    pub max_len: usize,
    /// Texts with more WordPiece tokens than this are set aside.
    pub filter_threshold: usize,
}

impl Default for BertConfig {
    fn default() -> Self {
        Self {
            max_len: 128,
            filter_threshold: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub formats: Vec<Format>,
    /// Rows kept in frequency tables and word-weight lists.
    pub top_k: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            formats: vec![Format::Json, Format::Csv, Format::Svg],
            top_k: 25,
        }
    }
}

impl PipelineConfig {
    pub fn clean_config(&self) -> CleanConfig {
        CleanConfig {
            min_words: self.clean.min_words,
            stages: self.clean.stages.clone(),
            lexicon_dir: self.paths.lexicon_dir.clone(),
        }
    }

    pub fn embed_config(&self) -> EmbedTrainConfig {
        EmbedTrainConfig {
            seed: self.seed,
            ..self.model.embed.clone()
        }
    }
}

/// Parses `key=value`. The value is read as JSON when it parses, otherwise
/// taken as a string, so `--set model.cnn.epochs=3` and
/// `--set paths.input=data.csv` both work.
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got {s:?}")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Usage(format!("--set has an empty key in {s:?}")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Usage(format!("--set {key}: {} is not a section", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split yields at least one part")
}

/// Dotted paths of every leaf of `resolved` that `given` does not mention.
fn defaulted_leaves(resolved: &Value, given: Option<&Value>, prefix: &str, out: &mut Vec<(String, String)>) {
    match resolved {
        Value::Object(map) => {
            for (k, v) in map {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                let sub = given.and_then(|g| g.get(k));
                defaulted_leaves(v, sub, &path, out);
            }
        }
        leaf => {
            if given.is_none() {
                out.push((prefix.to_string(), leaf.to_string()));
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: PipelineConfig,
    /// `(key, value)` for every setting that fell back to its default.
    pub defaults: Vec<(String, String)>,
}

/// Reads the optional config file, applies overrides and the seed flag.
pub fn resolve(file: Option<&Path>, overrides: &[(String, Value)], seed: Option<u64>) -> Result<Resolved> {
    let mut given = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::data(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", p.display())))?
        }
        None => Value::Object(Default::default()),
    };
    if !given.is_object() {
        return Err(CliError::data("config must be a JSON object"));
    }
    for (k, v) in overrides {
        set_path(&mut given, k, v.clone())?;
    }
    if let Some(s) = seed {
        set_path(&mut given, "seed", Value::from(s))?;
    }
    let config: PipelineConfig =
        serde_json::from_value(given.clone()).map_err(|e| CliError::data(format!("invalid config: {e}")))?;
    let mut defaults = Vec::new();
    defaulted_leaves(&serde_json::to_value(&config)?, Some(&given), "", &mut defaults);
    Ok(Resolved { config, defaults })
}
