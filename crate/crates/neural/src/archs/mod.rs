//! The two sequence classifiers and their training loop.

pub mod bilstm;
pub mod cnn;
pub mod model;
pub mod sequences;
pub mod train;

pub use bilstm::{BilstmModel, BilstmSpec};
pub use cnn::{CnnModel, CnnSpec};
pub use model::{predict, read_model, save_model, CheckpointMeta, DropoutKey, Predictions, Schedule, SequenceModel};
pub use sequences::{encode_sequences, EncodedSet, SequenceVocab};
pub use train::{evaluate, train, TrainRun};
