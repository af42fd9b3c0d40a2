use std::io::Write;
use std::path::Path;

use indexmap::IndexMap;
use log::info;

use sentio_core::bertprep::{encode_batch, token_length_filter, write_jsonl, write_tensor_file, WordPieceVocab};
use sentio_core::corpus::split_indices;
use sentio_core::embed::train_embeddings;
use sentio_core::evalreport::{
    classification_report, confusion, distribution_series, emit, frequency_table, sentiment_proportions,
    word_weights, ComparisonBar, ReportBundle, TextStats,
};
use sentio_core::features::{count_transform, fit_vocab, tfidf_transform};
use sentio_core::nb::nb_fit;
use sentio_core::sparse::{CsrMatrix, SparseValue};
use sentio_core::textclean::{length_stats, Cleaner};
use sentio_core::{Corpus, SentimentLabel};
use sentio_neural::archs::{
    encode_sequences, predict, save_model, train, BilstmModel, CnnModel, EncodedSet, SequenceModel, SequenceVocab,
    TrainRun,
};

use crate::artifacts::*;
use crate::config::PipelineConfig;
use crate::error::{CliError, Result};

pub fn clean(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let corpus = read_corpus(input)?;
    let mut cleaner = Cleaner::new(cfg.clean_config())?;
    if cfg.clean.stages.phonetic {
        cleaner.fit_phonetic(&corpus.records);
    }
    let cleaned = cleaner.clean_all(&corpus.records);
    let kept: Vec<_> = cleaned.iter().filter(|c| c.kept()).map(|c| c.to_record()).collect();
    write_records(&out.join(CLEANED), &kept)?;

    let mut w = create(&out.join(LENGTH_STATS))?;
    let mut lines = vec!["row,original_len,cleaned_len,token_count,dropped".to_string()];
    for (i, (s, c)) in length_stats(&cleaned).iter().zip(&cleaned).enumerate() {
        let dropped = c.dropped.map(|d| format!("{d:?}")).unwrap_or_default();
        lines.push(format!("{i},{},{},{},{dropped}", s.original_len, s.cleaned_len, s.token_count));
    }
    writeln!(w, "{}", lines.join("\n"))
        .and_then(|_| w.flush())
        .map_err(|e| CliError::data(e.to_string()))?;
    info!("cleaned {} records, kept {}", corpus.len(), kept.len());
    Ok(())
}

pub fn split(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let corpus = read_corpus(input)?;
    let spec = cfg.split.spec(cfg.seed);
    let parts = split_indices(corpus.len(), &spec)?;
    for (name, idx) in &parts {
        let sub = corpus.select(idx, name.as_str());
        write_records(&out.join(split_csv(name)), &sub.records)?;
        info!("{name}: {} records", idx.len());
    }
    let manifest = SplitManifest {
        seed: spec.seed,
        records: corpus.len(),
        fractions: spec.fractions,
        sizes: parts.iter().map(|(k, v)| (k.clone(), v.len())).collect(),
        indices: parts,
    };
    write_json(&out.join(SPLIT_MANIFEST), &manifest)
}

pub fn featurize(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let splits = read_splits(input)?;
    let f = &cfg.features;
    let vocab = fit_vocab(&tokens(&splits[0].1), f.ngram_range, f.max_features)?;
    vocab.save(&out.join(VOCAB))?;
    let mut labels: IndexMap<&str, Vec<SentimentLabel>> = IndexMap::new();
    for (name, corpus) in &splits {
        let counts = count_transform(&tokens(corpus), &vocab);
        let path = out.join(features_file(name));
        let w = create(&path)?;
        let written = if f.tfidf {
            tfidf_transform(&counts, &vocab)?.write_binary(w)
        } else {
            counts.write_binary(w)
        };
        written.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        labels.insert(name, corpus.labels());
    }
    write_json(&out.join(LABELS), &labels)?;
    let meta = FeaturesMeta {
        kind: if f.tfidf { "tfidf" } else { "counts" }.into(),
        ngram_range: f.ngram_range,
        features: vocab.len(),
        splits: splits.iter().map(|s| s.0.to_string()).collect(),
    };
    info!("{} features over {} training documents", vocab.len(), splits[0].1.len());
    write_json(&out.join(FEATURES_META), &meta)
}

fn read_matrix<T: SparseValue>(dir: &Path, split: &str) -> Result<CsrMatrix<T>> {
    let path = dir.join(features_file(split));
    CsrMatrix::read_binary(open(&path)?).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

/// Positive-class posterior from per-class log scores.
fn positive_posterior(scores: &[f64]) -> f64 {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = scores.iter().map(|s| (s - m).exp()).sum();
    (scores[SentimentLabel::Positive.code() as usize] - m).exp() / z
}

fn nb_typed<T: SparseValue>(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let labels: IndexMap<String, Vec<SentimentLabel>> = read_json(&input.join(LABELS))?;
    let train_y = labels
        .get("train")
        .ok_or_else(|| CliError::data(format!("{}: no train labels", input.display())))?;
    let x = read_matrix::<T>(input, "train")?;
    let mut model = nb_fit(&x, train_y, cfg.model.nb.alpha)?;
    model.vocab = Some(VOCAB.to_string());
    model.save(&out.join(NB_MODEL))?;

    let splits: Vec<(&'static str, ())> = SPLITS.iter().filter(|s| labels.contains_key(**s)).map(|&s| (s, ())).collect();
    let Some(&(name, ())) = held_out(&splits) else {
        info!("no held-out split; skipping predictions");
        return Ok(());
    };
    let x = read_matrix::<T>(input, name)?;
    let mut pred = PredictionFile {
        model: "nb".into(),
        split: name.into(),
        labels: labels[name].clone(),
        predicted: Vec::new(),
        scores: Vec::new(),
    };
    for i in 0..x.rows() {
        let (c, v) = x.row(i);
        let (label, scores) = model.predict_row(c, v)?;
        pred.predicted.push(label);
        pred.scores.push(positive_posterior(&scores));
    }
    write_json(&out.join(PREDICTIONS), &pred)
}

pub fn train_nb(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let meta: FeaturesMeta = read_json(&input.join(FEATURES_META))?;
    match meta.kind.as_str() {
        "counts" => nb_typed::<u32>(cfg, input, out),
        "tfidf" => nb_typed::<f64>(cfg, input, out),
        other => Err(CliError::data(format!("unknown feature kind {other:?}"))),
    }
}

fn encode(corpus: &Corpus, vocab: &SequenceVocab, max_len: usize) -> Result<EncodedSet> {
    Ok(encode_sequences(&tokens(corpus), &corpus.labels(), vocab, max_len)?)
}

fn train_sequence<M: SequenceModel>(
    cfg: &PipelineConfig,
    input: &Path,
    out: &Path,
    vocab_size: Option<usize>,
    build: impl FnOnce(usize) -> Result<M>,
) -> Result<()> {
    let splits = read_splits(input)?;
    let vocab = SequenceVocab::fit(&tokens(&splits[0].1), vocab_size)?;
    let mut model = build(vocab.size())?;
    let l = model.max_len();
    let train_set = encode(&splits[0].1, &vocab, l)?;
    let val = splits.iter().find(|s| s.0 == "val").map(|s| encode(&s.1, &vocab, l)).transpose()?;
    info!("{}: {} sequence tokens, {} parameters", model.arch(), vocab.size(), model.params().count());
    let run: TrainRun = train(&mut model, &train_set, val.as_ref(), cfg.seed, |r| {
        info!(
            "epoch {:>3}  loss {:.4}  acc {:.4}  val_loss {}  val_acc {}",
            r.epoch,
            r.loss,
            r.acc,
            r.val_loss.map_or("-".into(), |v| format!("{v:.4}")),
            r.val_acc.map_or("-".into(), |v| format!("{v:.4}")),
        )
    })?;
    info!("trained in {:.1}s, best epoch {}", run.wall_time_secs, run.best_epoch);
    save_model(&out.join(CHECKPOINT), &model, vocab.size(), cfg.seed, run.epochs.last())?;
    write_json(&out.join(SEQUENCE_VOCAB), &vocab)?;
    write_json(&out.join(HISTORY), &run)?;
    run.write_csv(create(&out.join(HISTORY_CSV))?)
        .map_err(|e| CliError::data(e.to_string()))?;

    if let Some((name, corpus)) = held_out(&splits) {
        let set = encode(corpus, &vocab, l)?;
        let p = predict(&model, &set.ids, model.schedule().batch_size)?;
        let pred = PredictionFile {
            model: model.arch().into(),
            split: name.to_string(),
            labels: set.labels,
            predicted: p.labels,
            scores: p.scores,
        };
        write_json(&out.join(PREDICTIONS), &pred)?;
    }
    Ok(())
}

pub fn train_cnn(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let spec = cfg.model.cnn.clone();
    train_sequence(cfg, input, out, spec.vocab_size, |rows| Ok(CnnModel::new(spec, rows, cfg.seed)?))
}

pub fn train_bilstm(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let spec = cfg.model.bilstm.clone();
    train_sequence(cfg, input, out, spec.vocab_size, |rows| Ok(BilstmModel::new(spec, rows, cfg.seed)?))
}

/// Trains on `train.csv` when `input` is a split directory, else on the
/// given CSV.
pub fn train_embed(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let corpus = if input.is_dir() {
        read_corpus(&input.join(split_csv("train")))?
    } else {
        read_corpus(input)?
    };
    let emb = train_embeddings(&tokens(&corpus), &cfg.embed_config())?;
    emb.save_text(&out.join(EMBEDDINGS))?;
    info!("{} vectors of dimension {}", emb.len(), emb.dim);
    Ok(())
}

pub fn bert_prep(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let vocab_path = cfg
        .paths
        .vocab_file
        .as_deref()
        .ok_or_else(|| CliError::Usage("bert-prep needs paths.vocab_file".into()))?;
    let vocab = WordPieceVocab::load(vocab_path)?;
    let corpus = read_corpus(input)?;
    let texts: Vec<&str> = corpus.iter().map(|r| r.text.as_str()).collect();
    let filter = token_length_filter(&texts, &vocab, cfg.bert.filter_threshold);
    let kept: Vec<&str> = filter.kept.iter().map(|&i| texts[i]).collect();
    let enc = encode_batch(&kept, &vocab, cfg.bert.max_len)?;
    write_jsonl(create(&out.join(ENCODINGS_JSONL))?, &enc)?;
    write_tensor_file(create(&out.join(ENCODINGS_TENSORS))?, &enc)?;
    let labels: Vec<SentimentLabel> = filter.kept.iter().map(|&i| corpus.records[i].label).collect();
    write_json(&out.join(LABELS), &labels)?;
    write_json(&out.join(LENGTH_FILTER), &filter)?;
    info!(
        "encoded {} texts, set aside {} over {} pieces",
        enc.len(),
        filter.dropped.len(),
        cfg.bert.filter_threshold
    );
    Ok(())
}

/// Prints the classification report of a trained model's held-out
/// predictions and writes the report bundle.
pub fn evaluate(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<()> {
    let pred: PredictionFile = read_json(&input.join(PREDICTIONS))?;
    let report = classification_report(&pred.labels, &pred.predicted)?;
    let cm = confusion(&pred.labels, &pred.predicted)?;
    let accuracy = report.accuracy.unwrap_or_default();
    println!("{} on {} ({} samples)", pred.model, pred.split, pred.labels.len());
    print!("{}", report.render());
    let mut bundle = ReportBundle {
        report: Some(report),
        confusion: Some(cm),
        comparison: vec![ComparisonBar {
            model: pred.model.clone(),
            accuracy,
            n: pred.labels.len() as u64,
        }],
        ..ReportBundle::default()
    };
    let history = input.join(HISTORY);
    if history.exists() {
        let run: TrainRun = read_json(&history)?;
        bundle.learning_curves.push(run.curve());
    }
    emit(&bundle, out, &cfg.report.formats)?;
    Ok(())
}

/// Merges the corpus statistics and the evaluations named in a run
/// manifest into one bundle.
pub fn report(cfg: &PipelineConfig, from: &Path, out: &Path) -> Result<()> {
    let manifest: RunManifest = read_json(from)?;
    let base = from.parent().unwrap_or(Path::new("."));
    let mut bundle = ReportBundle::default();
    if let Some(c) = &manifest.corpus {
        let corpus = read_corpus(&base.join(c))?;
        let toks = tokens(&corpus);
        let k = Some(cfg.report.top_k);
        bundle.proportions = sentiment_proportions(&corpus.labels());
        bundle.frequency = frequency_table(&toks, k);
        let labelled: Vec<(Vec<String>, SentimentLabel)> =
            toks.iter().cloned().zip(corpus.labels()).collect();
        bundle.word_weights = word_weights(&labelled, k);
        let stats: Vec<TextStats<'_>> = corpus
            .iter()
            .zip(&toks)
            .map(|(r, t)| TextStats {
                text: &r.text,
                tokens: t,
                label: r.label,
            })
            .collect();
        (bundle.histograms, bundle.densities) = distribution_series(&stats);
    }
    let mut single = None;
    for e in &manifest.evaluations {
        let mut path = base.join(e);
        if path.is_dir() {
            path = path.join(REPORT);
        }
        let b: ReportBundle = read_json(&path)?;
        bundle.learning_curves.extend(b.learning_curves.iter().cloned());
        bundle.comparison.extend(b.comparison.iter().cloned());
        single = Some(b);
    }
    if let (1, Some(b)) = (manifest.evaluations.len(), single) {
        bundle.report = b.report;
        bundle.confusion = b.confusion;
    }
    emit(&bundle, out, &cfg.report.formats)?;
    Ok(())
}
