//! Probability-optimal binary hierarchical SVM classifiers for small
//! embedded targets.
//!
//! The pipeline has two offline phases:
//!
//! 1. [`tree`] picks the tree shape from class probabilities so that the
//!    expected number of classifier evaluations per sample is minimal,
//!    optionally under a maximum depth, and trains a linear SVM
//!    ([`svm`]) at every internal node.
//! 2. [`moc`] shrinks the stored support-vector set by replacing vectors
//!    with nearby candidates so that nodes share them.
//!
//! [`data`] provides CSV ingestion, windowed features and seeded synthetic
//! datasets, [`eval`] runs radius sweeps, [`format`] reads and writes model
//! files, and [`cli`] backs the `hiersvm` binary. Each capability has a
//! runnable program under `examples/`.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod format;
pub mod moc;
pub mod svm;
pub mod tree;

pub use error::{Error, Result};
pub use svm::{BinaryNodeModel, FeatureVector, Side, SupportEntry, TrainConfig};
pub use tree::{ActivityClass, ClassifierTree, TreeBuildConfig, TreeStats};
