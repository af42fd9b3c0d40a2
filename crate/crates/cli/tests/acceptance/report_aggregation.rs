//! Published per-class figures fed through the report aggregator must give
//! the published macro and weighted rows to within 0.01. The per-class
//! inputs are themselves rounded to two decimals, hence the tolerance.

use sentio_core::evalreport::{AverageRow, ClassReport};

use super::support::Verdict;

struct Published {
    name: &'static str,
    /// `(label, precision, recall, support)`
    classes: [(&'static str, f64, f64, u64); 2],
    /// `(precision, recall, f1)`
    macro_avg: (f64, f64, f64),
    weighted_avg: (f64, f64, f64),
}

const PUBLISHED: [Published; 4] = [
    Published {
        name: "nb",
        classes: [("negative", 0.93, 0.75, 14659), ("positive", 0.74, 0.92, 10984)],
        macro_avg: (0.83, 0.84, 0.82),
        weighted_avg: (0.85, 0.83, 0.83),
    },
    Published {
        name: "cnn",
        classes: [("negative", 0.99, 0.97, 16225), ("positive", 0.96, 0.98, 11555)],
        macro_avg: (0.97, 0.98, 0.97),
        weighted_avg: (0.98, 0.98, 0.98),
    },
    Published {
        name: "bilstm",
        classes: [("negative", 0.98, 0.98, 32710), ("positive", 0.97, 0.97, 22850)],
        macro_avg: (0.97, 0.97, 0.97),
        weighted_avg: (0.97, 0.97, 0.97),
    },
    Published {
        name: "bert",
        classes: [("negative", 1.00, 0.99, 14659), ("positive", 0.99, 0.99, 10984)],
        macro_avg: (0.99, 0.99, 0.99),
        weighted_avg: (0.99, 0.99, 0.99),
    },
];

const TOL: f64 = 0.01;

fn compare(model: &str, row: &str, got: &AverageRow, want: (f64, f64, f64), support: u64, worst: &mut f64) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    for (metric, g, w) in [("P", got.precision, want.0), ("R", got.recall, want.1), ("F1", got.f1, want.2)] {
        let d = (g - w).abs();
        *worst = worst.max(d);
        out.push((d <= TOL, format!("{model} {row} {metric}: {g:.4} vs {w:.2}")));
    }
    out.push((got.support == support, format!("{model} {row} support {} vs {support}", got.support)));
    out
}

pub fn run() -> Verdict {
    let mut checks = Vec::new();
    let mut worst = 0.0f64;
    for p in &PUBLISHED {
        let r = ClassReport::from_class_metrics(&p.classes);
        let total: u64 = p.classes.iter().map(|c| c.3).sum();
        checks.extend(compare(p.name, "macro", &r.macro_avg, p.macro_avg, total, &mut worst));
        checks.extend(compare(p.name, "weighted", &r.weighted_avg, p.weighted_avg, total, &mut worst));
    }
    // the CNN macro precision straddles the rounding boundary
    let cnn = ClassReport::from_class_metrics(&PUBLISHED[1].classes);
    let mp = cnn.macro_avg.precision;
    checks.push(((0.97..=0.98).contains(&mp), format!("cnn macro P {mp} outside [0.97, 0.98]")));
    Verdict::from_checks(
        &checks,
        format!("{} aggregate values from 4 published reports, worst deviation {worst:.4} <= {TOL}", checks.len()),
    )
}
