//! Confusion-derived metrics, stratified cross-validation, grid search and the
//! full-versus-selected training benchmark.

mod bench;
mod cv;
mod metrics;

pub use bench::{benchmark, median, render_table, BenchmarkOptions, BenchmarkRow, TABLE_COLUMNS};
pub use cv::{cross_validate, grid_search, CvResult, FoldResult, GridResult, GridRow, GridSpec};
pub use metrics::{confusion, metrics, BenignView, ConfusionMatrix, Metrics};
