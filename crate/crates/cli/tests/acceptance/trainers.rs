//! The three trainers on the bundled synthetic corpora at their default
//! specs: NB, CNN and BiLSTM on the sentiment corpus, then CNN against
//! unigram NB on the negation corpus.

use std::time::Instant;

use sentio_core::corpus::split;
use sentio_core::features::{count_transform, fit_vocab};
use sentio_core::nb::nb_fit;
use sentio_core::synthetic::{bundled_negation, bundled_sentiment};
use sentio_core::{Corpus, SplitSpec};
use sentio_neural::archs::{encode_sequences, evaluate, train, BilstmModel, BilstmSpec, CnnModel, CnnSpec, EncodedSet, SequenceModel, SequenceVocab};

use super::support::Verdict;

const SEED: u64 = 7;
const LIMIT_SECS: f64 = 300.0;

struct Splits {
    train: Corpus,
    val: Corpus,
    test: Corpus,
}

fn three_way(corpus: &Corpus) -> Splits {
    let mut parts = split(corpus, &SplitSpec::three_way(SEED)).expect("valid split");
    Splits {
        train: parts.shift_remove("train").expect("train"),
        val: parts.shift_remove("val").expect("val"),
        test: parts.shift_remove("test").expect("test"),
    }
}

fn tokens(c: &Corpus) -> Vec<Vec<&str>> {
    c.iter().map(|r| r.text.split_whitespace().collect()).collect()
}

fn accuracy(pred: &[sentio_core::SentimentLabel], truth: &[sentio_core::SentimentLabel]) -> f64 {
    pred.iter().zip(truth).filter(|p| p.0 == p.1).count() as f64 / truth.len() as f64
}

/// Unigram counts, add-one smoothing; test accuracy.
fn nb_accuracy(s: &Splits) -> f64 {
    let train = tokens(&s.train);
    let vocab = fit_vocab(&train, (1, 1), None).expect("vocab");
    let model = nb_fit(&count_transform(&train, &vocab), &s.train.labels(), 1.0).expect("fit");
    let pred = model.predict(&count_transform(&tokens(&s.test), &vocab)).expect("predict");
    accuracy(&pred, &s.test.labels())
}

struct Outcome {
    train_acc: f64,
    test_acc: f64,
    epochs: usize,
    secs: f64,
}

fn encode(c: &Corpus, vocab: &SequenceVocab, max_len: usize) -> EncodedSet {
    encode_sequences(&tokens(c), &c.labels(), vocab, max_len).expect("encode")
}

/// Trains from scratch and scores train (in evaluation mode) and test.
fn fit_sequence<M: SequenceModel>(s: &Splits, vocab_size: Option<usize>, build: impl FnOnce(usize) -> M) -> Outcome {
    let start = Instant::now();
    let vocab = SequenceVocab::fit(&tokens(&s.train), vocab_size).expect("vocab");
    let mut model = build(vocab.size());
    let l = model.max_len();
    let (train_set, val_set, test_set) = (encode(&s.train, &vocab, l), encode(&s.val, &vocab, l), encode(&s.test, &vocab, l));
    let run = train(&mut model, &train_set, Some(&val_set), SEED, |_| {}).expect("training");
    let bs = model.schedule().batch_size;
    let (_, train_acc) = evaluate(&model, &train_set, bs).expect("evaluate train");
    let (_, test_acc) = evaluate(&model, &test_set, bs).expect("evaluate test");
    Outcome {
        train_acc,
        test_acc,
        epochs: run.epochs.len(),
        secs: start.elapsed().as_secs_f64(),
    }
}

fn cnn(s: &Splits) -> Outcome {
    let spec = CnnSpec::default();
    fit_sequence(s, spec.vocab_size, |rows| CnnModel::new(spec, rows, SEED).expect("cnn spec"))
}

fn bilstm(s: &Splits) -> Outcome {
    let spec = BilstmSpec::default();
    fit_sequence(s, spec.vocab_size, |rows| BilstmModel::new(spec, rows, SEED).expect("bilstm spec"))
}

fn sequence_checks(name: &str, o: &Outcome, checks: &mut Vec<(bool, String)>) -> String {
    checks.push((o.train_acc >= 0.95, format!("{name} train acc {:.4} < 0.95", o.train_acc)));
    checks.push((o.test_acc >= 0.90, format!("{name} test acc {:.4} < 0.90", o.test_acc)));
    checks.push((o.secs < LIMIT_SECS, format!("{name} took {:.0}s, limit {LIMIT_SECS}s", o.secs)));
    format!("{name} train {:.4} test {:.4} ({} epochs, {:.0}s)", o.train_acc, o.test_acc, o.epochs, o.secs)
}

pub fn run() -> Verdict {
    let mut checks = Vec::new();
    let sentiment = three_way(&bundled_sentiment().expect("bundled corpus"));
    let nb = nb_accuracy(&sentiment);
    checks.push((nb >= 0.95, format!("nb test acc {nb:.4} < 0.95")));
    let c = sequence_checks("cnn", &cnn(&sentiment), &mut checks);
    let b = sequence_checks("bilstm", &bilstm(&sentiment), &mut checks);

    let negation = three_way(&bundled_negation().expect("bundled corpus"));
    let nb_neg = nb_accuracy(&negation);
    let cnn_neg = cnn(&negation);
    let gap = cnn_neg.test_acc - nb_neg;
    checks.push((gap >= 0.10, format!("negation: cnn {:.4} - nb {nb_neg:.4} = {gap:.4} < 0.10", cnn_neg.test_acc)));
    checks.push((cnn_neg.secs < LIMIT_SECS, format!("negation cnn took {:.0}s", cnn_neg.secs)));

    Verdict::from_checks(
        &checks,
        format!(
            "sentiment: nb test {nb:.4}, {c}, {b}; negation: cnn {:.4} vs unigram nb {nb_neg:.4} (+{:.1} points)",
            cnn_neg.test_acc,
            100.0 * gap
        ),
    )
}
