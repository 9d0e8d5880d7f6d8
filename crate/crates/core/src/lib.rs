//! Sentence-level event classification.
//!
//! The crate covers the whole pipeline from annotated sentences to
//! per-label F1 tables:
//!
//! * [`corpus`]: JSONL sentence records, corpus statistics, multi-label to
//!   single-label relaxation and stratified folds.
//! * [`featurize`]: lexicon, sentiment, rhetorical, domain and annotation
//!   features, plus a vocabulary that prunes constant columns.
//! * [`linear`]: a sample-weighted linear SVM trained by subgradient descent.
//! * [`multiclass`]: one-vs-rest decoding with an explicit no-event class.
//! * [`boost`]: AdaBoost.M1 over the one-vs-rest SVM.
//! * [`multilabel`]: binary relevance, classifier chains and ensembles of
//!   classifier chains.
//! * [`evalrun`]: per-label scoring, cross-validated experiments, ablations
//!   and table rendering.
//! * [`syngen`]: a seeded synthetic corpus generator.

pub mod boost;
pub mod corpus;
pub mod error;
pub mod evalrun;
pub mod featurize;
pub mod fsutil;
pub mod linear;
pub mod multiclass;
pub mod multilabel;
pub mod sparse;
pub mod syngen;

pub use error::{Error, Result};

/// Class name used for sentences without any event label.
pub const NO_EVENT: &str = "N";
