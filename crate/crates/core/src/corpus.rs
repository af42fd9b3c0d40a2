//! Tweet corpus loading, label encoding and seeded train/validation/test
//! splitting.
//!
//! Splits shuffle record indices with [`SplitMix64`] and then cut the
//! shuffled order by cumulative fractions: every split except the last gets
//! `floor(fraction * N)` records and the last takes the remainder. There is
//! no stratification.

use std::fmt;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Binary sentiment with the numeric codes 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum SentimentLabel {
    Negative = 0,
    Positive = 1,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 2] = [SentimentLabel::Negative, SentimentLabel::Positive];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(SentimentLabel::Negative),
            1 => Some(SentimentLabel::Positive),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SentimentLabel::Negative => "negative",
            SentimentLabel::Positive => "positive",
        }
    }
}

impl From<SentimentLabel> for u8 {
    fn from(l: SentimentLabel) -> u8 {
        l.code()
    }
}

impl TryFrom<u8> for SentimentLabel {
    type Error = Error;

    fn try_from(code: u8) -> Result<Self> {
        SentimentLabel::from_code(code).ok_or_else(|| Error::Label(code.to_string()))
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Parse a sentiment cell. Accepts `0`/`1` and the words `negative`/`positive`
/// in any case.
pub fn encode_label(raw: &str) -> Result<SentimentLabel> {
    match raw {
        "0" => return Ok(SentimentLabel::Negative),
        "1" => return Ok(SentimentLabel::Positive),
        _ => {}
    }
    if raw.eq_ignore_ascii_case("negative") {
        Ok(SentimentLabel::Negative)
    } else if raw.eq_ignore_ascii_case("positive") {
        Ok(SentimentLabel::Positive)
    } else {
        Err(Error::Label(raw.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub text: String,
    pub label: SentimentLabel,
}

impl Record {
    pub fn new(text: impl Into<String>, label: SentimentLabel) -> Self {
        Self {
            text: text.into(),
            label,
        }
    }
}

/// An immutable, ordered collection of records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub records: Vec<Record>,
    pub provenance: String,
}

impl Corpus {
    pub fn new(records: Vec<Record>, provenance: impl Into<String>) -> Self {
        Self {
            records,
            provenance: provenance.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Record> {
        self.records.iter()
    }

    /// Sub-corpus made of the records at `indices`, in that order.
    pub fn select(&self, indices: &[usize], provenance: impl Into<String>) -> Corpus {
        Corpus::new(
            indices.iter().map(|&i| self.records[i].clone()).collect(),
            provenance,
        )
    }

    pub fn labels(&self) -> Vec<SentimentLabel> {
        self.records.iter().map(|r| r.label).collect()
    }
}

/// Load a `text,sentiment` CSV. Errors carry the 1-based file line.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, path)
}

/// Parse `text,sentiment` CSV from any reader; `origin` is used for messages
/// and provenance.
pub fn read_csv<R: std::io::Read>(reader: R, origin: &Path) -> Result<Corpus> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if names != ["text", "sentiment"] {
        return Err(parse_err(
            1,
            format!("expected header `text,sentiment`, found `{}`", names.join(",")),
        ));
    }

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        if row.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 columns, found {}", row.len()),
            ));
        }
        let label = encode_label(row[1].trim()).map_err(|e| parse_err(line, e.to_string()))?;
        records.push(Record::new(&row[0], label));
    }
    Ok(Corpus::new(records, origin.display().to_string()))
}

/// Write records as a `text,sentiment` CSV.
pub fn write_csv<'a, W: std::io::Write>(
    writer: W,
    records: impl IntoIterator<Item = &'a Record>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::invalid(e.to_string());
    w.write_record(["text", "sentiment"]).map_err(to_err)?;
    for r in records {
        w.write_record([r.text.as_str(), &r.label.to_string()])
            .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(PathBuf::from("<csv>"), e))?;
    Ok(())
}

/// Named fractions plus the shuffle seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub fractions: Vec<(String, f64)>,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new<S: Into<String>>(fractions: impl IntoIterator<Item = (S, f64)>, seed: u64) -> Self {
        Self {
            fractions: fractions.into_iter().map(|(n, f)| (n.into(), f)).collect(),
            seed,
        }
    }

    /// 70/15/15 train/val/test.
    pub fn three_way(seed: u64) -> Self {
        Self::new([("train", 0.70), ("val", 0.15), ("test", 0.15)], seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fractions.is_empty() {
            return Err(Error::Split("no fractions given".into()));
        }
        for (i, (name, f)) in self.fractions.iter().enumerate() {
            if !(*f > 0.0 && *f <= 1.0) {
                return Err(Error::Split(format!("fraction for {name:?} must be in (0, 1], got {f}")));
            }
            if self.fractions[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::Split(format!("duplicate split name {name:?}")));
            }
        }
        let total: f64 = self.fractions.iter().map(|(_, f)| f).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Split(format!("fractions sum to {total}, not 1")));
        }
        Ok(())
    }
}

/// Partition `0..n` into the named splits of `spec`.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<IndexMap<String, Vec<usize>>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Split("cannot split an empty corpus".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::new(spec.seed).shuffle(&mut order);

    let mut out = IndexMap::with_capacity(spec.fractions.len());
    let mut start = 0;
    let last = spec.fractions.len() - 1;
    for (i, (name, frac)) in spec.fractions.iter().enumerate() {
        let end = if i == last {
            n
        } else {
            // the epsilon absorbs products such as 0.29 * 100 = 28.999…
            (start + (frac * n as f64 + 1e-9).floor() as usize).min(n)
        };
        out.insert(name.clone(), order[start..end].to_vec());
        start = end;
    }
    Ok(out)
}

/// Shuffle-and-cut split of a corpus.
pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<IndexMap<String, Corpus>> {
    let parts = split_indices(corpus.len(), spec)?;
    Ok(parts
        .into_iter()
        .map(|(name, idx)| {
            let prov = format!("{}#{}", corpus.provenance, name);
            let sub = corpus.select(&idx, prov);
            (name, sub)
        })
        .collect())
}

/// Unshuffled split: the first `head` indices form one part and the rest the
/// other.
pub fn split_head(
    n: usize,
    head: usize,
    head_name: &str,
    tail_name: &str,
) -> Result<IndexMap<String, Vec<usize>>> {
    if head > n {
        return Err(Error::Split(format!("head of {head} exceeds corpus size {n}")));
    }
    let mut out = IndexMap::new();
    out.insert(head_name.to_string(), (0..head).collect());
    out.insert(tail_name.to_string(), (head..n).collect());
    Ok(out)
}
