//! WordPiece against the toy vocabulary: golden tokenizations, greedy
//! maximality against a backtracking reference, encoding layout on fuzzed
//! text and the exact 60-piece filter boundary.

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestError, TestRng, TestRunner};
use sentio_core::bertprep::{encode, token_length_filter, wordpiece_tokenize, wordpiece_word, WordPieceVocab, UNK};

use super::support::{core_data, Verdict};

const GREEDY_CASES: u32 = 10_000;
const ENCODING_CASES: u32 = 2_000;
const MAX_LEN: usize = 128;
const THRESHOLD: usize = 60;

fn toy() -> WordPieceVocab {
    WordPieceVocab::load(&core_data("tests/data/toy_vocab.txt")).expect("toy vocab")
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn describe<T: std::fmt::Debug>(e: TestError<T>) -> String {
    match e {
        TestError::Fail(why, input) => format!("{input:?}: {why}"),
        TestError::Abort(why) => format!("aborted: {why}"),
    }
}

fn golden(v: &WordPieceVocab) -> Vec<(bool, String)> {
    let cases: [(&str, &[&str]); 9] = [
        ("playing", &["play", "##ing"]),
        ("Olympics", &["olympic", "##s"]),
        ("goo", &["go", "##o"]),
        ("abc", &["abc"]),
        ("abca", &["abc", "##a"]),
        ("abab", &["ab", "##ab"]),
        ("medal!", &["medal", "!"]),
        ("Gold, medal", &["gold", ",", "medal"]),
        ("zzz playing", &[UNK, "play", "##ing"]),
    ];
    let mut checks: Vec<(bool, String)> = cases
        .iter()
        .map(|(text, want)| {
            let got = wordpiece_tokenize(text, v);
            (got == *want, format!("{text:?} -> {got:?}, expected {want:?}"))
        })
        .collect();
    // the full trace of "playing": [CLS] play ##ing [SEP] then padding
    let e = encode("playing", v, MAX_LEN).expect("encode");
    let ids = [v.cls, v.id("play").unwrap(), v.id("##ing").unwrap(), v.sep];
    let ok = e.input_ids[..4] == ids
        && e.input_ids[4..].iter().all(|&i| i == v.pad)
        && e.attention_mask.iter().map(|&m| m as usize).sum::<usize>() == 4
        && e.type_ids.iter().all(|&t| t == 0)
        && e.real_length == 4;
    checks.push((ok, format!("encoding of \"playing\": {:?}", &e.input_ids[..6])));
    checks
}

/// Every full decomposition of `word` into vocabulary pieces.
fn all_splits(word: &[char], first: bool, vocab: &WordPieceVocab) -> Vec<Vec<String>> {
    if word.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for end in 1..=word.len() {
        let mut piece: String = word[..end].iter().collect();
        if !first {
            piece.insert_str(0, "##");
        }
        if vocab.id(&piece).is_some() {
            for mut rest in all_splits(&word[end..], false, vocab) {
                rest.insert(0, piece.clone());
                out.push(rest);
            }
        }
    }
    out
}

fn longest_prefix(word: &[char], first: bool, vocab: &WordPieceVocab) -> usize {
    (1..=word.len())
        .rev()
        .find(|&end| {
            let mut p: String = word[..end].iter().collect();
            if !first {
                p.insert_str(0, "##");
            }
            vocab.id(&p).is_some()
        })
        .unwrap_or(0)
}

fn greedy(v: &WordPieceVocab) -> Result<(), String> {
    runner(GREEDY_CASES)
        .run(&"[abcgols]{1,8}", |word| {
            let pieces = wordpiece_word(&word, v);
            let chars: Vec<char> = word.chars().collect();
            let mut pos = 0;
            if pieces == [UNK] {
                // the greedy path must be blocked somewhere
                while pos < chars.len() {
                    let n = longest_prefix(&chars[pos..], pos == 0, v);
                    if n == 0 {
                        return Ok(());
                    }
                    pos += n;
                }
                return Err(TestCaseError::fail("greedy path exists but word became [UNK]"));
            }
            for p in &pieces {
                let n = longest_prefix(&chars[pos..], pos == 0, v);
                let len = p.trim_start_matches("##").chars().count();
                prop_assert_eq!(len, n, "piece {} is not the longest match", p);
                pos += n;
            }
            prop_assert_eq!(pos, chars.len());
            prop_assert!(all_splits(&chars, true, v).contains(&pieces));
            Ok(())
        })
        .map_err(|e| format!("greedy maximality: {}", describe(e)))
}

fn encodings(v: &WordPieceVocab) -> Result<(), String> {
    let text = prop_oneof![
        "\\PC{0,80}",
        prop::collection::vec(prop_oneof![Just("playing "), Just("go "), Just("abc, "), Just("zzz ")], 0..90)
            .prop_map(|w| w.concat()),
    ];
    let max_len = prop_oneof![Just(MAX_LEN), 2usize..40];
    runner(ENCODING_CASES)
        .run(&(text, max_len), |(text, max_len)| {
            let e = encode(&text, v, max_len).expect("max_len >= 2");
            prop_assert_eq!(e.input_ids.len(), max_len);
            prop_assert_eq!(e.attention_mask.len(), max_len);
            prop_assert_eq!(e.type_ids.len(), max_len);
            prop_assert_eq!(e.input_ids[0], v.cls);
            prop_assert_eq!(e.input_ids[e.real_length - 1], v.sep);
            for i in 0..max_len {
                prop_assert_eq!(e.attention_mask[i] == 1, i < e.real_length);
                prop_assert_eq!(e.input_ids[i] == v.pad, i >= e.real_length);
            }
            let pieces = wordpiece_tokenize(&text, v);
            prop_assert_eq!(e.real_length, (pieces.len() + 2).min(max_len));
            for (id, p) in e.input_ids[1..e.real_length - 1].iter().zip(&pieces) {
                prop_assert_eq!(Some(*id), v.id(p));
            }
            Ok(())
        })
        .map_err(|e| format!("encoding invariants: {}", describe(e)))
}

fn boundaries(v: &WordPieceVocab) -> Vec<(bool, String)> {
    let texts = [
        String::new(),
        vec!["go"; 59].join(" "),
        vec!["go"; 60].join(" "),
        vec!["go"; 61].join(" "),
        vec!["playing"; 30].join(" "),
        vec!["playing"; 31].join(" "),
        format!("{} go go", vec!["playing"; 29].join(" ")),
        format!("{} go go go", vec!["playing"; 29].join(" ")),
    ];
    let f = token_length_filter(&texts, v, THRESHOLD);
    let dropped: Vec<(usize, usize)> = f.dropped.iter().map(|d| (d.index, d.pieces)).collect();
    let mut checks = vec![
        (f.kept == [0, 1, 2, 4, 6], format!("kept {:?}, expected [0, 1, 2, 4, 6]", f.kept)),
        (dropped == [(3, 61), (5, 62), (7, 61)], format!("dropped {dropped:?}")),
    ];
    // 126 pieces fill a 128 encoding exactly; 127 are truncated
    for (n, real, last) in [(126, 128, v.sep), (127, 128, v.sep), (125, 127, v.pad)] {
        let e = encode(&vec!["go"; n].join(" "), v, MAX_LEN).expect("encode");
        let ok = e.real_length == real && e.input_ids[MAX_LEN - 1] == last && e.input_ids[real - 2] == v.id("go").unwrap();
        checks.push((ok, format!("{n} pieces at {MAX_LEN}: real length {}", e.real_length)));
    }
    checks
}

pub fn run() -> Verdict {
    let v = toy();
    let mut checks = golden(&v);
    checks.extend(boundaries(&v));
    for r in [greedy(&v), encodings(&v)] {
        if let Err(e) = r {
            checks.push((false, e));
        }
    }
    Verdict::from_checks(
        &checks,
        format!(
            "10 golden cases incl. playing -> play ##ing; {GREEDY_CASES} greedy-maximality cases; \
             {ENCODING_CASES} fuzzed encodings; filter boundary at {THRESHOLD} pieces exact"
        ),
    )
}
