//! Library side of the `flowsieve` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{cmd_benchmark, cmd_report, cmd_select, cmd_synth};
pub use config::{PartialConfig, RunConfig};
pub use error::{CliError, CliResult};
pub use report::RunReport;
