//! Text-sentiment toolkit: tweet cleaning, document-term features, a
//! multinomial naive Bayes baseline, word embeddings, WordPiece input
//! preparation and classification reporting.
//!
//! The neural trainers live in the `sentio-neural` crate and the batch
//! pipeline in `sentio-cli`.

pub mod bertprep;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod evalreport;
pub mod features;
pub mod nb;
pub mod rng;
pub mod sparse;
pub mod synthetic;
pub mod tensorfile;
pub mod textclean;

pub use corpus::{Corpus, Record, SentimentLabel, SplitSpec};
pub use error::{Error, Result};
pub use rng::SplitMix64;
