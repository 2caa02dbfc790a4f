//! Per-feature relevance scores: information gain, chi-squared, recursive
//! feature elimination, mean absolute deviation and dispersion ratio.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowdata::Dataset;
use crate::parallel;
use crate::trees::{self, ColumnIndex, Family, ModelConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    InfoGain,
    ChiSquared,
    Rfe,
    Mad,
    DispersionRatio,
}

impl Method {
    /// Every method, in the order [`score_all`] returns them.
    pub const ALL: [Method; 5] = [
        Method::InfoGain,
        Method::ChiSquared,
        Method::Rfe,
        Method::Mad,
        Method::DispersionRatio,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::InfoGain => "info_gain",
            Method::ChiSquared => "chi_squared",
            Method::Rfe => "rfe",
            Method::Mad => "mad",
            Method::DispersionRatio => "dispersion_ratio",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One selector's scores, aligned with `features`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScores {
    pub method: Method,
    pub features: Vec<String>,
    pub scores: Vec<f64>,
}

impl MethodScores {
    /// Checks alignment and that every score is finite and nonnegative.
    pub fn new(method: Method, features: Vec<String>, scores: Vec<f64>) -> Result<Self> {
        if features.len() != scores.len() {
            return Err(Error::InvalidArgument(format!(
                "{} scores for {} features",
                scores.len(),
                features.len()
            )));
        }
        for (f, &s) in features.iter().zip(&scores) {
            if !s.is_finite() || s < 0.0 {
                return Err(Error::InvalidScore {
                    feature: f.clone(),
                    value: s,
                });
            }
        }
        Ok(MethodScores {
            method,
            features,
            scores,
        })
    }

    pub fn score_of(&self, feature: &str) -> Option<f64> {
        self.features.iter().position(|f| f == feature).map(|i| self.scores[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinStrategy {
    EqualFrequency,
    EqualWidth,
}

impl std::str::FromStr for BinStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal_frequency" | "equal-frequency" => Ok(BinStrategy::EqualFrequency),
            "equal_width" | "equal-width" => Ok(BinStrategy::EqualWidth),
            other => Err(Error::InvalidArgument(format!("unknown binning strategy `{other}`"))),
        }
    }
}

/// How continuous features are made discrete for information gain and
/// chi-squared. Features with at most `continuous_threshold` distinct values
/// are used as-is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationConfig {
    pub strategy: BinStrategy,
    pub bins: usize,
    pub continuous_threshold: usize,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        DiscretizationConfig {
            strategy: BinStrategy::EqualFrequency,
            bins: 10,
            continuous_threshold: 20,
        }
    }
}

impl DiscretizationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 bins, got {}",
                self.bins
            )));
        }
        Ok(())
    }
}

/// Maps each value to a discrete code. Low-cardinality columns get the rank
/// of the value among the distinct values; others get a bin index, where bin
/// b holds values in (edge[b-1], edge[b]].
pub fn discretize(values: &[f64], cfg: &DiscretizationConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();

    let edges: Vec<f64> = if distinct.len() <= cfg.continuous_threshold {
        // Codes are ranks; the "edges" are the distinct values except the last.
        distinct[..distinct.len().saturating_sub(1)].to_vec()
    } else {
        let n = sorted.len();
        let mut edges: Vec<f64> = match cfg.strategy {
            BinStrategy::EqualFrequency => (1..cfg.bins).map(|i| sorted[(i * n).div_ceil(cfg.bins) - 1]).collect(),
            BinStrategy::EqualWidth => {
                let (lo, hi) = (sorted[0], sorted[n - 1]);
                (1..cfg.bins)
                    .map(|i| lo + (hi - lo) * i as f64 / cfg.bins as f64)
                    .collect()
            }
        };
        edges.dedup();
        edges
    };
    Ok(values.iter().map(|&x| edges.partition_point(|&e| e < x)).collect())
}

fn entropy_of_counts(counts: [u64; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Shannon entropy of a binary label vector, in bits.
pub fn entropy(labels: &[u8]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::InvalidArgument("entropy of an empty label vector".into()));
    }
    let ones = labels.iter().filter(|&&l| l == 1).count() as u64;
    Ok(entropy_of_counts([labels.len() as u64 - ones, ones]))
}

/// `(value code × class)` counts.
pub fn contingency(codes: &[usize], labels: &[u8]) -> Vec<[u64; 2]> {
    let width = codes.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![[0u64; 2]; width];
    for (&c, &l) in codes.iter().zip(labels) {
        table[c][l as usize] += 1;
    }
    table
}

/// Information gain of a contingency table: H(Y) − Σ_v (n_v/n)·H(Y | v).
pub fn information_gain_table(table: &[[u64; 2]]) -> f64 {
    let class_totals = table.iter().fold([0u64; 2], |acc, r| [acc[0] + r[0], acc[1] + r[1]]);
    let n = (class_totals[0] + class_totals[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let h_y = entropy_of_counts(class_totals);
    let conditional: f64 = table
        .iter()
        .filter(|r| r[0] + r[1] > 0)
        .map(|r| (r[0] + r[1]) as f64 / n * entropy_of_counts(*r))
        .sum();
    (h_y - conditional).clamp(0.0, h_y)
}

/// Pearson chi-squared statistic of a contingency table. Cells with zero
/// expected count contribute nothing.
pub fn chi_squared_table(table: &[[u64; 2]]) -> f64 {
    let col = table.iter().fold([0u64; 2], |acc, r| [acc[0] + r[0], acc[1] + r[1]]);
    let n = (col[0] + col[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mut stat = 0.0;
    for r in table {
        let row_total = (r[0] + r[1]) as f64;
        for c in 0..2 {
            let expected = row_total * col[c] as f64 / n;
            if expected > 0.0 {
                let d = r[c] as f64 - expected;
                stat += d * d / expected;
            }
        }
    }
    stat
}

pub fn information_gain(d: &Dataset, feature: &str, disc: &DiscretizationConfig) -> Result<f64> {
    let codes = discretize(d.column_by_name(feature)?, disc)?;
    Ok(information_gain_table(&contingency(&codes, d.labels())))
}

pub fn chi_squared(d: &Dataset, feature: &str, disc: &DiscretizationConfig) -> Result<f64> {
    let codes = discretize(d.column_by_name(feature)?, disc)?;
    Ok(chi_squared_table(&contingency(&codes, d.labels())))
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// (1/n)·Σ|x − x̄| around the arithmetic mean.
pub fn mean_abs_deviation_of(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("mean absolute deviation of no values".into()));
    }
    if is_constant(values) {
        return Ok(0.0);
    }
    let m = mean(values);
    Ok(values.iter().map(|x| (x - m).abs()).sum::<f64>() / values.len() as f64)
}

pub fn mean_abs_deviation(d: &Dataset, feature: &str) -> Result<f64> {
    mean_abs_deviation_of(d.column_by_name(feature)?)
}

/// sqrt(between-class variance / total variance), both population variances.
/// Zero for a constant column.
pub fn dispersion_ratio_of(values: &[f64], labels: &[u8]) -> Result<f64> {
    if values.is_empty() || values.len() != labels.len() {
        return Err(Error::InvalidArgument(
            "dispersion ratio needs aligned, nonempty inputs".into(),
        ));
    }
    if is_constant(values) {
        return Ok(0.0);
    }
    let n = values.len() as f64;
    let mu = mean(values);
    let total: f64 = values.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n;
    if total == 0.0 {
        return Ok(0.0);
    }
    let mut sums = [0.0f64; 2];
    let mut counts = [0usize; 2];
    for (&x, &l) in values.iter().zip(labels) {
        sums[l as usize] += x;
        counts[l as usize] += 1;
    }
    let between: f64 = (0..2)
        .filter(|&c| counts[c] > 0)
        .map(|c| {
            let mu_c = sums[c] / counts[c] as f64;
            counts[c] as f64 / n * (mu_c - mu) * (mu_c - mu)
        })
        .sum();
    Ok((between / total).sqrt().clamp(0.0, 1.0))
}

pub fn dispersion_ratio(d: &Dataset, feature: &str) -> Result<f64> {
    dispersion_ratio_of(d.column_by_name(feature)?, d.labels())
}

/// Recursive feature elimination. The base model is refit on the surviving
/// features and the least important one (ties: lexically smallest name) is
/// dropped until one remains. The r-th feature removed scores r/F, so the last
/// survivor scores 1.
pub fn rfe_rank(d: &Dataset, base_model: &ModelConfig, seed: u64) -> Result<MethodScores> {
    let f = d.feature_count();
    if f < 2 {
        return Err(Error::InvalidArgument(format!(
            "RFE needs at least 2 features, got {f}"
        )));
    }
    d.require_both_classes()?;
    let cfg = ModelConfig {
        seed,
        ..base_model.clone()
    };
    let names = d.feature_names();
    let mut surviving: Vec<usize> = (0..f).collect();
    let mut scores = vec![0.0; f];
    let mut rank = 1;
    let cols = d.column_refs();
    let index = if cfg.family == Family::RandomForest {
        parallel::map_range(f, |j| ColumnIndex::new(cols[j]))
    } else {
        Vec::new()
    };
    while surviving.len() > 1 {
        let model = trees::fit_subset(&cols, &index, &surviving, d.labels(), &cfg)?;
        let importances = model.feature_importance();
        let weakest = (0..surviving.len())
            .min_by(|&a, &b| {
                importances[a]
                    .total_cmp(&importances[b])
                    .then_with(|| names[surviving[a]].cmp(&names[surviving[b]]))
            })
            .expect("at least two survivors");
        let removed = surviving.remove(weakest);
        scores[removed] = rank as f64 / f as f64;
        rank += 1;
    }
    scores[surviving[0]] = 1.0;
    MethodScores::new(Method::Rfe, names.to_vec(), scores)
}

fn per_feature(d: &Dataset, method: Method, score: impl Fn(&str) -> Result<f64> + Sync + Send) -> Result<MethodScores> {
    let names = d.feature_names();
    let scores = parallel::map_range(names.len(), |j| score(&names[j]))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    MethodScores::new(method, names.to_vec(), scores)
}

/// Runs all five selectors. Only RFE consumes `seed`.
pub fn score_all(
    d: &Dataset,
    disc: &DiscretizationConfig,
    rfe_model: &ModelConfig,
    seed: u64,
) -> Result<Vec<MethodScores>> {
    disc.validate()?;
    d.require_both_classes()?;
    Ok(vec![
        per_feature(d, Method::InfoGain, |f| information_gain(d, f, disc))?,
        per_feature(d, Method::ChiSquared, |f| chi_squared(d, f, disc))?,
        rfe_rank(d, rfe_model, seed)?,
        per_feature(d, Method::Mad, |f| mean_abs_deviation(d, f))?,
        per_feature(d, Method::DispersionRatio, |f| dispersion_ratio(d, f))?,
    ])
}
