//! The 100-tweet golden corpus must clean byte-exactly to the reference
//! output, and cleaning twice must equal cleaning once on 10,000 generated
//! tweets.

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestError, TestRng, TestRunner};
use sentio_core::corpus::{load_csv, Record, SentimentLabel};
use sentio_core::textclean::{CleanConfig, Cleaner, DropReason};

use super::support::{core_data, Verdict};

const FUZZ_CASES: u32 = 10_000;

fn golden() -> (Vec<(bool, String)>, usize) {
    let corpus = load_csv(core_data("tests/data/golden_tweets.csv")).expect("golden tweets");
    let mut cleaner = Cleaner::new(CleanConfig::default()).expect("default config");
    cleaner.fit_phonetic(&corpus.records);
    let mut reader = csv::Reader::from_path(core_data("tests/data/golden_expected.csv")).expect("golden expected");
    let mut checks = Vec::new();
    let mut rows = 0;
    for (row, rec) in reader.records().zip(&corpus.records) {
        let row = row.expect("csv row");
        let out = cleaner.clean(rec);
        let dropped = match out.dropped {
            None => "",
            Some(DropReason::Empty) => "Empty",
            Some(DropReason::TooShort) => "TooShort",
            Some(DropReason::NotEnglish) => "NotEnglish",
        };
        if out.cleaned_text != row[1] || dropped != &row[2] {
            checks.push((false, format!("#{}: {:?}/{dropped} vs {:?}/{}", &row[0], out.cleaned_text, &row[1], &row[2])));
        }
        // idempotence with the fitted phonetic index as well
        let twice = cleaner.clean(&Record::new(out.cleaned_text.clone(), rec.label));
        if twice.cleaned_text != out.cleaned_text {
            checks.push((false, format!("#{} not idempotent: {:?}", &row[0], twice.cleaned_text)));
        }
        rows += 1;
    }
    checks.push((rows == 100 && corpus.len() == 100, format!("{rows} golden rows")));
    (checks, rows)
}

fn tweet_text() -> impl Strategy<Value = String> {
    let pieces = prop_oneof![
        Just("http://t.co/x1 ".to_string()),
        Just("www.example.com/a ".to_string()),
        Just("@someone ".to_string()),
        Just("#Tokyo2020 ".to_string()),
        Just("can't ".to_string()),
        Just("won’t ".to_string()),
        Just("gr8 ".to_string()),
        Just("lol ".to_string()),
        Just("soooo ".to_string()),
        Just("2 ".to_string()),
        Just("😂 ".to_string()),
        Just("🇬🇧".to_string()),
        Just("!!!".to_string()),
        "[a-zA-Z]{1,10} ",
        "[a-z0-9'’#@/.,é-]{1,8}",
        "\\PC{1,4}",
    ];
    prop::collection::vec(pieces, 0..20).prop_map(|v| v.concat())
}

fn fuzz() -> Result<(), String> {
    let cleaner = Cleaner::new(CleanConfig { min_words: 0, ..CleanConfig::default() }).expect("config");
    let config = Config { cases: FUZZ_CASES, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner
        .run(&tweet_text(), |text| {
            let once = cleaner.clean(&Record::new(text, SentimentLabel::Positive));
            let twice = cleaner.clean(&Record::new(once.cleaned_text.clone(), SentimentLabel::Positive));
            prop_assert_eq!(&twice.cleaned_text, &once.cleaned_text);
            Ok(())
        })
        .map_err(|e| match e {
            TestError::Fail(why, input) => format!("not idempotent on {input:?}: {why}"),
            TestError::Abort(why) => format!("fuzzing aborted: {why}"),
        })
}

pub fn run() -> Verdict {
    let (mut checks, rows) = golden();
    if let Err(e) = fuzz() {
        checks.push((false, e));
    }
    Verdict::from_checks(
        &checks,
        format!("{rows} golden tweets byte-exact and idempotent; {FUZZ_CASES} fuzzed tweets idempotent"),
    )
}
