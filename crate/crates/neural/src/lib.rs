//! Minimal reverse-mode autodiff and the CNN / BiLSTM sentiment trainers.

pub mod archs;
pub mod autodiff;
pub mod error;

pub use error::{NeuralError, Result};
