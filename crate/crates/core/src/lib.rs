//! Feature ranking and tree-ensemble benchmarking for labeled network-flow
//! datasets.
//!
//! The pipeline scores every feature with five independent selectors
//! (information gain, chi-squared, recursive feature elimination, mean
//! absolute deviation and dispersion ratio), folds the percent-normalized
//! scores into one ranking, keeps the top-k features and then measures how a
//! random forest and two gradient-boosting variants behave when trained on the
//! full versus the reduced feature set.

pub mod error;
pub mod evaluation;
pub mod flowdata;
pub mod parallel;
pub mod ranking;
pub mod selectors;
pub mod trees;

pub use error::{Error, Result};
pub use flowdata::Dataset;

/// Crate version, echoed into run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
