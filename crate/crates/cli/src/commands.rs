//! The four subcommands, callable without going through argument parsing.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use flowsieve::evaluation::{benchmark, grid_search, BenchmarkOptions, GridSpec};
use flowsieve::flowdata::{generate_synthetic, holdout_indices, load_table, SchemaAdapter, SyntheticSpec};
use flowsieve::parallel;
use flowsieve::ranking::{self, combine, top_k, AGGREGATION_RULE};
use flowsieve::selectors::score_all;
use flowsieve::trees::ModelConfig;
use flowsieve::Dataset;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::report::{BenchmarkResult, DatasetSummary, RunReport, Timing, TimingRow};

pub const REPORT_FILE: &str = "report.json";
pub const RANKING_FILE: &str = "ranking.csv";
pub const FEATURE_SET_FILE: &str = "feature_set.txt";
pub const BENCHMARK_FILE: &str = "benchmark.txt";

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn timing_environment(cfg: &RunConfig) -> String {
    format!(
        "{}-{}; fit wall-clock only, serial, median of {} after 1 discarded warm-up",
        std::env::consts::OS,
        std::env::consts::ARCH,
        cfg.repeats
    )
}

/// Loads the dataset and runs all five selectors.
fn select(cfg: &RunConfig, command: &str) -> CliResult<(Dataset, RunReport)> {
    let adapter = SchemaAdapter::resolve(&cfg.adapter)?;
    let table = load_table(&cfg.dataset, &adapter)?;
    let d = table.dataset;
    d.require_both_classes()?;
    if cfg.k > d.feature_count() {
        return Err(CliError::Usage(format!(
            "k = {} exceeds the {} features in {}",
            cfg.k,
            d.feature_count(),
            cfg.dataset.display()
        )));
    }

    let mut warnings = Vec::new();
    if table.report.rows_dropped > 0 {
        warnings.push(format!(
            "dropped {} of {} rows with unparseable cells",
            table.report.rows_dropped, table.report.rows_read
        ));
    }
    for (col, n) in table.report.missing_counts.iter().filter(|(_, &n)| n > 0) {
        warnings.push(format!("imputed {n} missing cells as 0 in `{col}`"));
    }

    let start = Instant::now();
    let raw = score_all(&d, &cfg.discretization, &cfg.rfe_model(), cfg.seed)?;
    for m in raw.iter().filter(|m| ranking::is_degenerate(m)) {
        warnings.push(format!(
            "{} scored every feature 0; its vector was replaced by a uniform one",
            m.method
        ));
    }
    let (normalized, ranking) = combine(&raw)?;
    let feature_set = top_k(&ranking, cfg.k)?;
    let selection_s = start.elapsed().as_secs_f64();

    let [benign, malicious] = d.class_counts();
    let report = RunReport {
        tool_version: flowsieve::VERSION.to_string(),
        command: command.to_string(),
        config: cfg.clone(),
        dataset: DatasetSummary {
            rows: d.row_count(),
            features: d.feature_count(),
            benign,
            malicious,
            load: table.report,
        },
        aggregation_rule: AGGREGATION_RULE.to_string(),
        raw_scores: raw,
        normalized_scores: normalized,
        ranking,
        feature_set,
        grid_search: None,
        benchmark: Vec::new(),
        warnings,
        timing: Timing {
            environment: timing_environment(cfg),
            threads: parallel::threads(),
            selection_s,
            grid_search_s: None,
            benchmark: Vec::new(),
        },
    };
    Ok((d, report))
}

fn write_selection(cfg: &RunConfig, report: &RunReport) -> CliResult<()> {
    write(&cfg.output_dir, RANKING_FILE, &report.ranking.to_csv())?;
    write(&cfg.output_dir, FEATURE_SET_FILE, &report.feature_set_text())?;
    Ok(())
}

/// Ranks features and writes `ranking.csv`, `feature_set.txt` and `report.json`.
pub fn cmd_select(cfg: &RunConfig) -> CliResult<RunReport> {
    let (_, report) = select(cfg, "select")?;
    write_selection(cfg, &report)?;
    write(&cfg.output_dir, REPORT_FILE, &report.to_json())?;
    Ok(report)
}

/// Selection, optional grid search on the training split, then the
/// full-versus-selected benchmark. Writes every output file.
pub fn cmd_benchmark(cfg: &RunConfig) -> CliResult<RunReport> {
    let (d, mut report) = select(cfg, "benchmark")?;

    let models: Vec<ModelConfig> = if cfg.grid {
        let start = Instant::now();
        let (train_rows, _) = holdout_indices(&d, cfg.test_fraction, cfg.seed)?;
        let train = d.take_rows(&train_rows);
        let results = cfg
            .families
            .iter()
            .map(|&f| {
                grid_search(
                    &train,
                    &GridSpec::default_for(f).with_seed(cfg.seed),
                    cfg.cv_folds,
                    cfg.seed,
                )
            })
            .collect::<flowsieve::Result<Vec<_>>>()?;
        report.timing.grid_search_s = Some(start.elapsed().as_secs_f64());
        let best = results.iter().map(|r| r.best.clone()).collect();
        report.grid_search = Some(results);
        best
    } else {
        cfg.families
            .iter()
            .map(|&f| ModelConfig::for_family(f).with_seed(cfg.seed))
            .collect()
    };

    let opts = BenchmarkOptions {
        repeats: cfg.repeats,
        warmup: 1,
        test_fraction: cfg.test_fraction,
        seed: cfg.seed,
    };
    let rows = benchmark(&d, &report.feature_set, &models, &opts)?;
    if rows.len() != 2 * models.len() {
        return Err(CliError::Internal(format!(
            "{} benchmark rows for {} models",
            rows.len(),
            models.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        for what in &row.metrics.undefined {
            report.warnings.push(format!(
                "{} ({} features): {what} is 0/0 and reported as 0",
                row.family.label(),
                row.n_features
            ));
        }
        report.benchmark.push(BenchmarkResult {
            family: row.family,
            feature_selection: row.feature_selection,
            n_features: row.n_features,
            model: models[i / 2].clone(),
            confusion: row.confusion,
            metrics: row.metrics.clone(),
            repeats: row.repeats,
        });
        report.timing.benchmark.push(TimingRow {
            family: row.family,
            feature_selection: row.feature_selection,
            training_time_s: row.training_time_s,
            samples_s: row.samples_s.clone(),
        });
    }

    write_selection(cfg, &report)?;
    write(&cfg.output_dir, BENCHMARK_FILE, &report.render_benchmark()?)?;
    write(&cfg.output_dir, REPORT_FILE, &report.to_json())?;
    Ok(report)
}

/// Writes a planted-signal dataset in the canonical layout.
pub fn cmd_synth(spec: &SyntheticSpec, out: &Path) -> CliResult<PathBuf> {
    let d = generate_synthetic(spec)?;
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    d.write_canonical(out)?;
    Ok(out.to_path_buf())
}

/// Reloads a report and renders its benchmark table (or, for a selection
/// report, its ranking).
pub fn cmd_report(path: &Path) -> CliResult<String> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let report = RunReport::from_json(&text, path)?;
    if report.benchmark.is_empty() {
        Ok(report.ranking.to_csv())
    } else {
        report.render_benchmark()
    }
}
