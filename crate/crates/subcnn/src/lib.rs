//! Subword-level convolutional text classification.
//!
//! This crate learns byte-pair-encoding merges from a corpus, segments text
//! into subwords (or characters, or words), and trains a multi-channel
//! convolutional classifier over the resulting token sequences. Everything
//! runs on a small self-contained f64 numeric core with exact backward
//! passes and a finite-difference gradient checker, and every operation is
//! deterministic under a fixed seed.
//!
//! # Modules
//!
//! - [`corpus`] — two-file dataset loading, text normalization, splits
//! - [`segmenter`] — BPE merge learning and application; char/word splitters
//! - [`vocab`] — token vocabularies and fixed-length index encoding
//! - [`numerics`] — tensors, layer forward/backward passes, optimizers,
//!   gradient checking
//! - [`model`] — the embedding + multi-channel conv + softmax classifier
//! - [`trainer`] — mini-batch training, best-checkpoint selection,
//!   checkpoint files
//! - [`evaluator`] — confusion matrix and macro precision/recall/F1
//! - [`cli`] — the `subcnn` command-line tool built from the above
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example learn_bpe
//! cargo run --example segment_text
//! cargo run --example gradient_check
//! cargo run --example train_tiny
//! cargo run --example evaluate_predictions
//! cargo run --example param_counts
//! cargo run --example compare_representations
//! ```

pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluator;
pub mod model;
pub mod numerics;
pub mod segmenter;
pub mod trainer;
pub mod vocab;

pub use error::{Error, Result};
