//! Fake-news text classification toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`dataset`] reads LIAR-format TSV files, collapses the six truthfulness
//!   labels into a binary target and produces the stratified hold-out split
//!   used for stacking.
//! * [`lingfeat`] computes the four domain-agnostic linguistic features
//!   (readability, punctuation count, sentiment, word count).
//! * [`vectorize`] turns text into TFIDF sparse vectors or PV-DM paragraph
//!   vectors.
//! * [`classical`] holds the four base classifiers (linear SVM, KNN,
//!   logistic regression, random forest) behind one contract.
//! * [`neural`] is a small feedforward network trained with backpropagation.
//! * [`ensemble`] stacks the base classifiers under an ANN meta-learner.
//! * [`harness`] runs the full experiment grid and renders reports.

pub mod classical;
pub mod dataset;
pub mod ensemble;
mod error;
pub mod features;
pub mod harness;
pub mod lingfeat;
pub mod matrix;
pub mod neural;
pub mod persist;
pub mod synth;
pub mod vectorize;

pub use classical::{BaseClassifier, Classifier, ModelKind, PredictionVector};
pub use dataset::{BinaryLabel, RawLabel, SplitSet, StackSplit, Statement};
pub use ensemble::{HybridVariant, StackingEnsemble};
pub use error::{Error, Result};
pub use features::{FeatureSet, Featurizer};
pub use lingfeat::{FeatureScaler, LinguisticFeatures};
pub use matrix::{FeatureMatrix, Row, RowRef, SparseVector};
pub use neural::{AnnConfig, AnnModel};
pub use vectorize::{Doc2VecConfig, Doc2VecModel, TfidfModel, TokenSeq};
