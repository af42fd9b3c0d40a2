use std::collections::HashMap;

use proptest::prelude::*;
use sentio_core::evalreport::{
    classification_report, confusion, emit, frequency_table, ClassReport, ComparisonBar, EpochRecord, Format,
    LearningCurve, ReportBundle,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn report_identities(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..200)) {
        let (t, p): (Vec<u8>, Vec<u8>) = pairs.iter().copied().unzip();
        let cm = confusion(&t, &p).unwrap();
        prop_assert_eq!(cm.total() as usize, t.len());
        let agree = t.iter().zip(&p).filter(|(a, b)| a == b).count() as f64 / t.len() as f64;
        let r = classification_report(&t, &p).unwrap();
        prop_assert_eq!(r.accuracy.unwrap(), agree);
        let support: u64 = r.classes.iter().map(|c| c.support).sum();
        prop_assert_eq!(support as usize, t.len());
        let w = |f: fn(&sentio_core::evalreport::ClassRow) -> f64| {
            r.classes.iter().map(|c| c.support as f64 * f(c)).sum::<f64>() / support as f64
        };
        prop_assert_eq!(r.weighted_avg.precision, w(|c| c.precision));
        prop_assert_eq!(r.weighted_avg.recall, w(|c| c.recall));
        prop_assert_eq!(r.weighted_avg.f1, w(|c| c.f1));
        let micro = r.micro_avg.clone().unwrap();
        prop_assert_eq!(micro.precision, agree);
        prop_assert_eq!(micro.recall, agree);

        // pooled counts computed independently
        let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
        for c in 0..2u8 {
            for (&a, &b) in t.iter().zip(&p) {
                if b == c && a == c { tp += 1.0 }
                if b == c && a != c { fp += 1.0 }
                if a == c && b != c { fn_ += 1.0 }
            }
        }
        prop_assert!((tp / (tp + fp) - micro.precision).abs() < 1e-15);
        prop_assert!((tp / (tp + fn_) - micro.recall).abs() < 1e-15);

        let swapped = confusion(&p, &t).unwrap();
        prop_assert_eq!((cm.fp, cm.fn_), (swapped.fn_, swapped.fp));
    }

    #[test]
    fn frequency_matches_naive_count(docs in prop::collection::vec(prop::collection::vec("[a-e]{1,2}", 0..8), 0..10)) {
        let mut naive: HashMap<&str, u64> = HashMap::new();
        for t in docs.iter().flatten() {
            *naive.entry(t).or_insert(0) += 1;
        }
        let table = frequency_table(&docs, None);
        prop_assert_eq!(table.len(), naive.len());
        for row in &table {
            prop_assert_eq!(naive[row.token.as_str()], row.count);
        }
        for w in table.windows(2) {
            prop_assert!(w[0].count > w[1].count || (w[0].count == w[1].count && w[0].token < w[1].token));
        }
    }
}

#[test]
fn published_style_aggregates() {
    let r = ClassReport::from_class_metrics(&[("negative", 0.99, 0.97, 16225), ("positive", 0.96, 0.98, 11555)]);
    assert!((r.macro_avg.precision - 0.975).abs() < 1e-12);
    assert!((r.weighted_avg.precision - 0.97752).abs() < 1e-4);
}

fn fixture() -> ReportBundle {
    let y = [1u8, 0, 1, 1, 0, 0, 1];
    let p = [1u8, 0, 0, 1, 0, 1, 1];
    ReportBundle {
        report: Some(classification_report(&y, &p).unwrap()),
        confusion: Some(confusion(&y, &p).unwrap()),
        comparison: ["nb", "cnn", "bilstm", "bert"]
            .iter()
            .zip([0.83, 0.9756, 0.9735, 0.9923])
            .map(|(m, a)| ComparisonBar {
                model: m.to_string(),
                accuracy: a,
                n: 100,
            })
            .collect(),
        learning_curves: vec![LearningCurve {
            model: "cnn".into(),
            epochs: (1..=3)
                .map(|e| EpochRecord {
                    epoch: e,
                    loss: 1.0 / e as f64,
                    acc: 0.5 + 0.1 * e as f64,
                    val_loss: Some(1.1 / e as f64),
                    val_acc: Some(0.45 + 0.1 * e as f64),
                })
                .collect(),
        }],
        ..Default::default()
    }
}

#[test]
fn emit_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let all = [Format::Json, Format::Csv, Format::Svg];
    let fa = emit(&fixture(), a.path(), &all).unwrap();
    let fb = emit(&fixture(), b.path(), &all).unwrap();
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
    let json: ReportBundle = serde_json::from_slice(&std::fs::read(a.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json, fixture());
}

#[test]
fn comparison_chart_has_four_bars() {
    let dir = tempfile::tempdir().unwrap();
    emit(&fixture(), dir.path(), &[Format::Svg]).unwrap();
    let svg = std::fs::read_to_string(dir.path().join("comparison.svg")).unwrap();
    assert_eq!(svg.matches("class=\"bar\"").count(), 4);
    assert!(svg.contains(">0.2<") || svg.contains(">0.5<"));
}

#[test]
fn empty_bundle_is_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let files = emit(&ReportBundle::default(), dir.path(), &[Format::Json, Format::Csv, Format::Svg]).unwrap();
    assert_eq!(files.len(), 1);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&files[0]).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!(v["report"].is_null());
}
