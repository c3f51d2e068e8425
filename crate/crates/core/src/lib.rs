//! Imbalanced-classification toolkit for credit-card-fraud style data:
//! nearest-neighbor under-sampling (ENN, RENN, OSS, NCR), a k-NN classifier,
//! a small dense network trained from scratch, confusion-matrix/ROC/AUC
//! evaluation, and a config-driven experiment pipeline tying them together.

pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod neighbors;
pub mod net;
pub mod pipeline;
pub mod report;
pub mod resample;
pub mod seeding;

pub use error::{Error, Result};
