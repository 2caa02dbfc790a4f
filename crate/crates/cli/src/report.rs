//! The JSON run report and the text files derived from it.

use flowsieve::evaluation::{render_table, BenchmarkRow, ConfusionMatrix, GridResult, Metrics};
use flowsieve::flowdata::LoadReport;
use flowsieve::ranking::{CombinedRanking, FeatureSet};
use flowsieve::selectors::MethodScores;
use flowsieve::trees::{Family, ModelConfig};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub features: usize,
    pub benign: usize,
    pub malicious: usize,
    pub load: LoadReport,
}

/// One benchmark row without its timing, which lives under `timing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub family: Family,
    pub feature_selection: bool,
    pub n_features: usize,
    pub model: ModelConfig,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub family: Family,
    pub feature_selection: bool,
    /// Median of `samples_s`.
    pub training_time_s: f64,
    pub samples_s: Vec<f64>,
}

/// Everything that varies between otherwise identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub environment: String,
    pub threads: usize,
    pub selection_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_search_s: Option<f64>,
    #[serde(default)]
    pub benchmark: Vec<TimingRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub command: String,
    pub config: RunConfig,
    pub dataset: DatasetSummary,
    pub aggregation_rule: String,
    pub raw_scores: Vec<MethodScores>,
    pub normalized_scores: Vec<MethodScores>,
    pub ranking: CombinedRanking,
    pub feature_set: FeatureSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_search: Option<Vec<GridResult>>,
    #[serde(default)]
    pub benchmark: Vec<BenchmarkResult>,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, path: &std::path::Path) -> CliResult<RunReport> {
        serde_json::from_str(text).map_err(|source| CliError::Report {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Re-joins results with their timings.
    pub fn benchmark_rows(&self) -> CliResult<Vec<BenchmarkRow>> {
        if self.benchmark.len() != self.timing.benchmark.len() {
            return Err(CliError::Internal(format!(
                "{} benchmark rows but {} timing rows",
                self.benchmark.len(),
                self.timing.benchmark.len()
            )));
        }
        self.benchmark
            .iter()
            .zip(&self.timing.benchmark)
            .map(|(b, t)| {
                if (b.family, b.feature_selection) != (t.family, t.feature_selection) {
                    return Err(CliError::Internal("benchmark and timing rows are out of step".into()));
                }
                Ok(BenchmarkRow {
                    family: b.family,
                    feature_selection: b.feature_selection,
                    n_features: b.n_features,
                    confusion: b.confusion,
                    metrics: b.metrics.clone(),
                    training_time_s: t.training_time_s,
                    repeats: b.repeats,
                    samples_s: t.samples_s.clone(),
                })
            })
            .collect()
    }

    pub fn render_benchmark(&self) -> CliResult<String> {
        Ok(render_table(&self.benchmark_rows()?))
    }

    pub fn feature_set_text(&self) -> String {
        let mut s = self.feature_set.names.join("\n");
        s.push('\n');
        s
    }
}
