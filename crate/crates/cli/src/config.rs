//! Run configuration. Values come from command-line flags, then an optional
//! TOML file, then built-in defaults, in that order of precedence.

use std::fs;
use std::path::{Path, PathBuf};

use flowsieve::selectors::{BinStrategy, DiscretizationConfig};
use flowsieve::trees::{Family, ModelConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Every field optional; one layer of configuration.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub dataset: Option<PathBuf>,
    pub adapter: Option<String>,
    pub bins: Option<usize>,
    pub disc_strategy: Option<BinStrategy>,
    pub continuous_threshold: Option<usize>,
    pub k: Option<usize>,
    pub rfe_estimators: Option<usize>,
    pub grid: Option<bool>,
    pub cv_folds: Option<usize>,
    pub families: Option<Vec<Family>>,
    pub test_fraction: Option<f64>,
    pub repeats: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl PartialConfig {
    pub fn from_file(path: &Path) -> CliResult<PartialConfig> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Fields set here win over `other`.
    pub fn or(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            dataset: self.dataset.or(other.dataset),
            adapter: self.adapter.or(other.adapter),
            bins: self.bins.or(other.bins),
            disc_strategy: self.disc_strategy.or(other.disc_strategy),
            continuous_threshold: self.continuous_threshold.or(other.continuous_threshold),
            k: self.k.or(other.k),
            rfe_estimators: self.rfe_estimators.or(other.rfe_estimators),
            grid: self.grid.or(other.grid),
            cv_folds: self.cv_folds.or(other.cv_folds),
            families: self.families.or(other.families),
            test_fraction: self.test_fraction.or(other.test_fraction),
            repeats: self.repeats.or(other.repeats),
            seed: self.seed.or(other.seed),
            output_dir: self.output_dir.or(other.output_dir),
        }
    }

    /// Fills the gaps with defaults. The seed has none.
    pub fn resolve(self) -> CliResult<RunConfig> {
        let defaults = DiscretizationConfig::default();
        let cfg = RunConfig {
            dataset: self
                .dataset
                .ok_or_else(|| CliError::Usage("no dataset given (--data or `dataset` in the config file)".into()))?,
            adapter: self.adapter.unwrap_or_else(|| "custom".into()),
            discretization: DiscretizationConfig {
                strategy: self.disc_strategy.unwrap_or(defaults.strategy),
                bins: self.bins.unwrap_or(defaults.bins),
                continuous_threshold: self.continuous_threshold.unwrap_or(defaults.continuous_threshold),
            },
            k: self.k.unwrap_or(8),
            rfe_estimators: self.rfe_estimators.unwrap_or(ModelConfig::rfe_default().n_estimators),
            grid: self.grid.unwrap_or(true),
            cv_folds: self.cv_folds.unwrap_or(5),
            families: self.families.unwrap_or_else(|| Family::ALL.to_vec()),
            test_fraction: self.test_fraction.unwrap_or(0.2),
            repeats: self.repeats.unwrap_or(5),
            seed: self
                .seed
                .ok_or_else(|| CliError::Usage("a seed is required (--seed or `seed` in the config file)".into()))?,
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from(".")),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A complete, validated configuration, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub adapter: String,
    pub discretization: DiscretizationConfig,
    pub k: usize,
    pub rfe_estimators: usize,
    pub grid: bool,
    pub cv_folds: usize,
    pub families: Vec<Family>,
    pub test_fraction: f64,
    pub repeats: usize,
    pub seed: u64,
    /// Where outputs go; not part of the echo so reruns elsewhere compare equal.
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.k == 0 {
            return Err(CliError::Usage("k must be at least 1".into()));
        }
        if self.rfe_estimators == 0 {
            return Err(CliError::Usage("--rfe-estimators must be at least 1".into()));
        }
        if self.repeats == 0 {
            return Err(CliError::Usage("--repeats must be at least 1".into()));
        }
        if self.cv_folds < 2 {
            return Err(CliError::Usage("--cv-folds must be at least 2".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(CliError::Usage(format!(
                "--test-fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.families.is_empty() {
            return Err(CliError::Usage("no model families selected".into()));
        }
        self.discretization.validate()?;
        Ok(())
    }

    /// The forest RFE refits, with the configured tree count.
    pub fn rfe_model(&self) -> ModelConfig {
        ModelConfig {
            n_estimators: self.rfe_estimators,
            ..ModelConfig::rfe_default()
        }
    }
}
