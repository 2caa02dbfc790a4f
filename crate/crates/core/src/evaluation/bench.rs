use std::fmt::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::{confusion, metrics, ConfusionMatrix, Metrics};
use crate::error::Result;
use crate::flowdata::{holdout_indices, Dataset};
use crate::parallel;
use crate::ranking::FeatureSet;
use crate::trees::{self, Family, ModelConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOptions {
    /// Timed fits per row; the reported time is their median.
    pub repeats: usize,
    /// Untimed fits run first and discarded.
    pub warmup: usize,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions {
            repeats: 5,
            warmup: 1,
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub family: Family,
    pub feature_selection: bool,
    pub n_features: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    /// Median wall-clock seconds of `fit`, excluding loading and prediction.
    pub training_time_s: f64,
    pub repeats: usize,
    pub samples_s: Vec<f64>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Trains every config on all features and on `fs` alone, over one shared
/// stratified holdout split. Fits run serially so timings are not perturbed.
pub fn benchmark(
    d: &Dataset,
    fs: &FeatureSet,
    cfgs: &[ModelConfig],
    opts: &BenchmarkOptions,
) -> Result<Vec<BenchmarkRow>> {
    if opts.repeats == 0 {
        return Err(crate::Error::InvalidArgument(
            "benchmark needs at least one repeat".into(),
        ));
    }
    let (train_rows, test_rows) = holdout_indices(d, opts.test_fraction, opts.seed)?;
    let full_train = d.take_rows(&train_rows);
    let full_test = d.take_rows(&test_rows);
    let sel_train = full_train.select_features(&fs.names)?;
    let sel_test = full_test.select_features(&fs.names)?;

    let mut rows = Vec::with_capacity(cfgs.len() * 2);
    for cfg in cfgs {
        for (selected, train, test) in [(false, &full_train, &full_test), (true, &sel_train, &sel_test)] {
            let cols = train.column_refs();
            let (model, samples) = parallel::serial_scope(|| -> Result<_> {
                for _ in 0..opts.warmup {
                    trees::fit(&cols, train.labels(), cfg)?;
                }
                let mut samples = Vec::with_capacity(opts.repeats);
                let mut last = None;
                for _ in 0..opts.repeats {
                    let start = Instant::now();
                    let m = trees::fit(&cols, train.labels(), cfg)?;
                    samples.push(start.elapsed().as_secs_f64());
                    last = Some(m);
                }
                Ok((last.expect("repeats > 0"), samples))
            })?;
            let pred = model.predict_dataset(test)?;
            let c = confusion(test.labels(), &pred.labels)?;
            rows.push(BenchmarkRow {
                family: cfg.family,
                feature_selection: selected,
                n_features: train.feature_count(),
                confusion: c,
                metrics: metrics(&c)?,
                training_time_s: median(&samples),
                repeats: opts.repeats,
                samples_s: samples,
            });
        }
    }
    Ok(rows)
}

pub const TABLE_COLUMNS: [&str; 8] = [
    "Model",
    "Feature Selection",
    "ACC",
    "PRC",
    "RCL",
    "F1S",
    "FPR",
    "Training Time",
];

/// `x` with `digits` significant figures.
fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.*}", digits.saturating_sub(1), x);
    }
    let magnitude = x.abs().log10().floor() as i64 + 1;
    let decimals = (digits as i64 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Plain-text comparison table. Metric columns are percentages with three
/// decimals, FPR has four significant figures and time (s) five.
pub fn render_table(rows: &[BenchmarkRow]) -> String {
    let cells: Vec<[String; 8]> = rows
        .iter()
        .map(|r| {
            [
                r.family.label().to_string(),
                if r.feature_selection { "Yes" } else { "No" }.to_string(),
                format!("{:.3}", r.metrics.acc),
                format!("{:.3}", r.metrics.prc),
                format!("{:.3}", r.metrics.rcl),
                format!("{:.3}", r.metrics.f1s),
                significant(r.metrics.fpr, 4),
                significant(r.training_time_s, 5),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = TABLE_COLUMNS.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, fields: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = fields
            .zip(&widths)
            .enumerate()
            .map(|(i, (f, w))| if i < 2 { format!("{f:<w$}") } else { format!("{f:>w$}") })
            .collect();
        writeln!(out, "{}", parts.join("  ").trim_end()).expect("string write");
    };
    line(&mut out, &mut TABLE_COLUMNS.iter().copied());
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    writeln!(out, "{}", rule.join("  ")).expect("string write");
    for row in &cells {
        line(&mut out, &mut row.iter().map(String::as_str));
    }
    out
}
