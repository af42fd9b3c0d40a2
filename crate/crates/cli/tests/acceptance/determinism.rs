//! Runs the whole CLI chain twice with the same seed in two scratch
//! directories and compares every artifact byte for byte. Training epochs
//! are cut down to keep the two runs short; everything else is default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use super::support::{core_data, Verdict};

const SEED: &str = "11";

fn steps(vocab: &str) -> Vec<Vec<String>> {
    let corpus = core_data("data/synthetic/sentiment.csv").display().to_string();
    let raw: Vec<Vec<&str>> = vec![
        vec!["clean", "--input", &corpus, "--output", "clean"],
        vec!["split", "--input", "clean/cleaned.csv", "--output", "split"],
        vec!["featurize", "--input", "split", "--output", "feat"],
        vec!["train-nb", "--input", "feat", "--output", "nb"],
        vec!["evaluate", "--input", "nb", "--output", "eval_nb"],
        vec!["train-cnn", "--input", "split", "--output", "cnn", "--set", "model.cnn.epochs=2"],
        vec!["evaluate", "--input", "cnn", "--output", "eval_cnn"],
        vec!["train-bilstm", "--input", "split", "--output", "bilstm", "--set", "model.bilstm.epochs=2"],
        vec!["evaluate", "--input", "bilstm", "--output", "eval_bilstm"],
        vec!["train-embed", "--input", "split", "--output", "embed", "--set", "model.embed.epochs=1"],
        vec!["bert-prep", "--input", "split/train.csv", "--output", "bert", "--set", vocab],
        vec!["report", "--from", "run.json", "--output", "report"],
    ];
    raw.into_iter()
        .map(|s| s.into_iter().map(String::from).chain(["--seed".into(), SEED.into(), "--quiet".into()]).collect())
        .collect()
}

const MANIFEST: &str = r#"{"corpus": "clean/cleaned.csv", "evaluations": ["eval_nb", "eval_cnn", "eval_bilstm"]}"#;

/// Runs the chain with `dir` as working directory, so every path the
/// artifacts record is relative and identical across runs.
fn chain(dir: &Path) -> Result<(), String> {
    std::fs::write(dir.join("run.json"), MANIFEST).map_err(|e| e.to_string())?;
    let vocab = format!("paths.vocab_file={}", core_data("tests/data/toy_vocab.txt").display());
    for args in steps(&vocab) {
        let out = Command::new(env!("CARGO_BIN_EXE_sentio"))
            .args(&args)
            .current_dir(dir)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{} failed: {}", args[0], String::from_utf8_lossy(&out.stderr).trim()));
        }
    }
    Ok(())
}

fn files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).expect("readable dir") {
            let p = e.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let bytes = std::fs::read(&p).expect("readable file");
                out.insert(p.strip_prefix(root).expect("under root").to_path_buf(), bytes);
            }
        }
    }
    out
}

/// Artifacts that must exist and agree; everything else is compared too.
const REQUIRED: [&str; 11] = [
    "clean/cleaned.csv",
    "split/split_manifest.json",
    "nb/nb_model.json",
    "cnn/history.json",
    "cnn/model.tensors",
    "bilstm/history.json",
    "eval_nb/report.json",
    "eval_cnn/report.json",
    "embed/embeddings.txt",
    "bert/encodings.jsonl",
    "report/report.json",
];

pub fn run() -> Verdict {
    let (a, b) = (tempfile::tempdir().expect("tempdir"), tempfile::tempdir().expect("tempdir"));
    for d in [&a, &b] {
        if let Err(e) = chain(d.path()) {
            return Verdict::fail(e);
        }
    }
    let (fa, fb) = (files(a.path()), files(b.path()));
    let mut checks: Vec<(bool, String)> = REQUIRED
        .iter()
        .map(|r| (fa.contains_key(Path::new(r)), format!("{r} missing")))
        .collect();
    let names_a: Vec<&PathBuf> = fa.keys().collect();
    let names_b: Vec<&PathBuf> = fb.keys().collect();
    checks.push((names_a == names_b, "the two runs wrote different file sets".into()));
    let mut bytes = 0;
    for (name, content) in &fa {
        bytes += content.len();
        let same = fb.get(name) == Some(content);
        checks.push((same, format!("{} differs", name.display())));
    }
    Verdict::from_checks(
        &checks,
        format!("{} artifacts ({bytes} bytes) identical across two runs with seed {SEED}", fa.len()),
    )
}
