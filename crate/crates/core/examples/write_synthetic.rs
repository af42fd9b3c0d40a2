//! Regenerate the bundled synthetic corpora:
//!
//!     cargo run -p sentio-core --example write_synthetic

use std::path::Path;

use sentio_core::corpus::write_csv;
use sentio_core::synthetic::{negation_corpus, sentiment_corpus, SyntheticSpec};

fn main() -> sentio_core::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic");
    let spec = SyntheticSpec::default();
    for (name, corpus) in [("sentiment", sentiment_corpus(&spec)), ("negation", negation_corpus(&spec))] {
        let path = dir.join(format!("{name}.csv"));
        let file = std::fs::File::create(&path).map_err(|e| sentio_core::Error::Invalid(e.to_string()))?;
        write_csv(file, &corpus.records)?;
        println!("{} records -> {}", corpus.len(), path.display());
    }
    Ok(())
}
