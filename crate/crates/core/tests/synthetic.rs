use std::collections::HashSet;

use sentio_core::corpus::{split, SplitSpec};
use sentio_core::features::{count_transform, fit_vocab};
use sentio_core::nb::nb_fit;
use sentio_core::synthetic::{
    bundled_negation, bundled_sentiment, negation_corpus, sentiment_corpus, word_pool, SyntheticSpec,
};
use sentio_core::textclean::{CleanConfig, Cleaner};
use sentio_core::Corpus;

#[test]
fn bundled_files_match_generator() {
    let spec = SyntheticSpec::default();
    assert_eq!(bundled_sentiment().unwrap().records, sentiment_corpus(&spec).records);
    assert_eq!(bundled_negation().unwrap().records, negation_corpus(&spec).records);
    assert_eq!(bundled_sentiment().unwrap().len(), 2000);
}

#[test]
fn pool_words_are_distinct() {
    let pool = word_pool(300, 5);
    assert_eq!(pool.iter().collect::<HashSet<_>>().len(), 300);
}

#[test]
fn cleaning_preserves_synthetic_text() {
    let corpus = bundled_sentiment().unwrap();
    let mut cleaner = Cleaner::new(CleanConfig::default()).unwrap();
    cleaner.fit_phonetic(&corpus.records);
    for r in corpus.records.iter().take(300) {
        let out = cleaner.clean(r);
        assert_eq!(out.cleaned_text, r.text);
        assert!(out.kept());
    }
}

fn nb_accuracy(corpus: &Corpus, seed: u64) -> f64 {
    let parts = split(corpus, &SplitSpec::new([("train", 0.9), ("test", 0.1)], seed)).unwrap();
    let tok = |c: &Corpus| -> Vec<Vec<String>> {
        c.records.iter().map(|r| r.text.split(' ').map(String::from).collect()).collect()
    };
    let (train, test) = (tok(&parts["train"]), tok(&parts["test"]));
    let vocab = fit_vocab(&train, (1, 1), None).unwrap();
    let model = nb_fit(&count_transform(&train, &vocab), &parts["train"].labels(), 1.0).unwrap();
    let pred = model.predict(&count_transform(&test, &vocab)).unwrap();
    let truth = parts["test"].labels();
    pred.iter().zip(&truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

#[test]
fn unigram_nb_separates_sentiment_but_not_negation() {
    let acc = nb_accuracy(&bundled_sentiment().unwrap(), 42);
    assert!(acc >= 0.95, "{acc}");
    let neg = nb_accuracy(&bundled_negation().unwrap(), 42);
    assert!(neg < 0.7, "negation corpus leaks through unigrams: {neg}");
}
