//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any gating criterion fails.
//!
//! Set `FLOWSIEVE_BOT_IOT=/path/to/flows.csv` to also run the Bot-IoT ranking
//! check, which reports but never fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use flowsieve::evaluation::{benchmark, BenchmarkOptions};
use flowsieve::flowdata::{generate_synthetic, load_table, DatasetId, SchemaAdapter, SyntheticSpec};
use flowsieve::ranking::{combine, normalize, top_k, FeatureSet};
use flowsieve::selectors::{
    chi_squared, chi_squared_table, dispersion_ratio, information_gain, mean_abs_deviation, score_all,
    DiscretizationConfig, Method, MethodScores,
};
use flowsieve::trees::{fit, fit_dataset, grad_hess, log_loss, sigmoid, Family, MaxFeatures, ModelConfig};
use flowsieve::Dataset;
use flowsieve_cli::{cmd_benchmark, cmd_synth, PartialConfig, RunConfig, RunReport};
use flowsieve_testkit::cases::{cart_suite, probe_grid, random_discrete, score_sets};
use flowsieve_testkit::{cart, numeric, scores};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BOT_IOT_ENV: &str = "FLOWSIEVE_BOT_IOT";

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn planted(seed: u64) -> (SyntheticSpec, Dataset) {
    let spec = SyntheticSpec::new(5000, 4, 28, 0.5, seed);
    let d = generate_synthetic(&spec).expect("valid spec");
    (spec, d)
}

fn select_top8(d: &Dataset, seed: u64) -> FeatureSet {
    let raw = score_all(d, &DiscretizationConfig::default(), &ModelConfig::rfe_default(), seed).expect("scores");
    top_k(&combine(&raw).expect("ranking").1, 8).expect("k <= F")
}

fn selector_oracle() -> Check {
    let start = Instant::now();
    let disc = DiscretizationConfig::default();
    let cases = random_discrete(101, 200, 6, 3, 3);
    let mut worst = 0.0f64;
    for case in &cases {
        let names: Vec<String> = (0..case.columns.len()).map(|j| format!("x{j}")).collect();
        let d = Dataset::new(names.clone(), case.columns.clone(), case.labels.clone()).map_err(|e| e.to_string())?;
        for (name, values) in names.iter().zip(&case.columns) {
            let pairs = [
                (
                    information_gain(&d, name, &disc),
                    scores::info_gain(values, &case.labels),
                ),
                (chi_squared(&d, name, &disc), scores::chi_squared(values, &case.labels)),
                (mean_abs_deviation(&d, name), scores::mad(values)),
                (
                    dispersion_ratio(&d, name),
                    scores::dispersion_ratio(values, &case.labels),
                ),
            ];
            for (got, want) in pairs {
                let got = got.map_err(|e| e.to_string())?;
                worst = worst.max((got - want).abs());
                ensure((got - want).abs() <= 1e-12, || {
                    format!("{got} vs oracle {want} on {case:?}")
                })?;
            }
        }
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("{} datasets, max deviation {worst:.1e}", cases.len()))
}

fn chi_squared_example() -> Check {
    let dependent = chi_squared_table(&[[10, 20], [20, 10]]);
    ensure((dependent - 6.6667).abs() <= 1e-4, || {
        format!("[[10,20],[20,10]] gave {dependent}")
    })?;
    let independent = chi_squared_table(&[[10, 20], [5, 10]]);
    ensure(independent == 0.0, || format!("independence table gave {independent}"))?;
    // The same table through a dataset column.
    let mut values = vec![0.0; 30];
    values.extend([1.0; 30]);
    let labels: Vec<u8> = [0, 1, 0, 1]
        .iter()
        .zip([10, 20, 20, 10])
        .flat_map(|(&y, n)| std::iter::repeat_n(y, n))
        .collect();
    let d = Dataset::new(vec!["x".into()], vec![values], labels).map_err(|e| e.to_string())?;
    let via_data = chi_squared(&d, "x", &DiscretizationConfig::default()).map_err(|e| e.to_string())?;
    ensure((via_data - dependent).abs() < 1e-12, || {
        format!("dataset path gave {via_data}")
    })?;
    Ok(format!("{dependent:.4}; independence {independent}"))
}

fn ranking_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let sets = score_sets(303, 1000, Method::ALL.len());
    for set in &sets {
        let raw: Vec<MethodScores> = Method::ALL
            .iter()
            .zip(&set.vectors)
            .map(|(&m, v)| MethodScores::new(m, set.features.clone(), v.clone()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for m in &raw {
            let sum: f64 = normalize(m).map_err(|e| e.to_string())?.scores.iter().sum();
            ensure((sum - 100.0).abs() <= 1e-9, || format!("normalized sum {sum}"))?;
        }
        let (_, base) = combine(&raw).map_err(|e| e.to_string())?;
        let mut scaled = raw.clone();
        let which = rng.random_range(0..scaled.len());
        let c = 10f64.powf(rng.random_range(-6.0..6.0));
        scaled[which].scores.iter_mut().for_each(|s| *s *= c);
        let (_, other) = combine(&scaled).map_err(|e| e.to_string())?;
        let f = set.features.len();
        for k in 1..=f {
            let a = top_k(&base, k).map_err(|e| e.to_string())?.names;
            let b = top_k(&other, k).map_err(|e| e.to_string())?.names;
            ensure(a == b, || format!("scaling method {which} by {c} changed top-{k}"))?;
            if k < f {
                let bigger = top_k(&base, k + 1).map_err(|e| e.to_string())?.names;
                ensure(a.iter().all(|n| bigger.contains(n)), || {
                    format!("top-{k} not inside top-{}", k + 1)
                })?;
            }
        }
    }
    Ok(format!("{} score sets", sets.len()))
}

fn planted_recovery() -> Check {
    let start = Instant::now();
    let mut hits = 0;
    let mut misses = Vec::new();
    for seed in 0..100 {
        let (spec, d) = planted(seed);
        let fs = select_top8(&d, seed);
        if spec.informative_features().iter().all(|f| fs.names.contains(f)) {
            hits += 1;
        } else {
            misses.push(seed);
        }
    }
    let elapsed = start.elapsed();
    ensure(hits >= 95, || {
        format!("{hits}/100 seeds recovered all four; misses {misses:?}")
    })?;
    within(elapsed, 120.0)?;
    Ok(format!("{hits}/100 seeds, {:.1} s", elapsed.as_secs_f64()))
}

fn gradient_check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p: f64 = rng.random_range(0.01..0.99);
        let y: u8 = rng.random_range(0..2);
        let z = (p / (1.0 - p)).ln();
        let (g, h) = grad_hess(sigmoid(z), y);
        let g_err = numeric::relative_error(g, numeric::derivative(|t| log_loss(t, y), z, 1e-3));
        let h_err = numeric::relative_error(h, numeric::derivative(|t| sigmoid(t) - f64::from(y), z, 1e-3));
        worst = worst.max(g_err).max(h_err);
        ensure(g_err < 1e-6 && h_err < 1e-6, || {
            format!("p={p} y={y}: errors {g_err:.1e}, {h_err:.1e}")
        })?;
    }
    Ok(format!("1000 points, max relative error {worst:.1e}"))
}

fn boosting_monotonicity() -> Check {
    let (_, d) = planted(0);
    let cfg = ModelConfig {
        learning_rate: 0.2,
        n_estimators: 100,
        ..ModelConfig::gbm_histogram()
    };
    let m = fit_dataset(&d, &cfg).map_err(|e| e.to_string())?;
    let loss = &m.stats.train_loss;
    ensure(loss.len() == 101, || format!("{} loss entries", loss.len()))?;
    for (round, w) in loss.windows(2).enumerate() {
        ensure(w[1] <= w[0] + 1e-12, || {
            format!("round {}: {} -> {}", round + 1, w[0], w[1])
        })?;
    }
    Ok(format!("loss {:.4} -> {:.6} over 100 rounds", loss[0], loss[100]))
}

fn cart_equivalence() -> Check {
    let suite = cart_suite(600, 707);
    ensure(suite.len() >= 500, || format!("only {} cases", suite.len()))?;
    let cfg = ModelConfig {
        n_estimators: 1,
        max_depth: None,
        min_samples_leaf: 1,
        max_features: MaxFeatures::All,
        bootstrap: false,
        ..ModelConfig::random_forest()
    };
    let mut probes_checked = 0;
    for case in &suite {
        let cols: Vec<&[f64]> = case.columns.iter().map(Vec::as_slice).collect();
        let model = fit(&cols, &case.labels, &cfg).map_err(|e| e.to_string())?;
        let oracle = cart::fit(&case.rows(), &case.labels);
        let probes = probe_grid(case.columns.len());
        let probe_cols: Vec<Vec<f64>> = (0..case.columns.len())
            .map(|j| probes.iter().map(|p| p[j]).collect())
            .collect();
        let refs: Vec<&[f64]> = probe_cols.iter().map(Vec::as_slice).collect();
        let got = model.predict(&refs).map_err(|e| e.to_string())?.labels;
        for (p, y) in probes.iter().zip(got) {
            ensure(y == oracle.predict(p), || format!("{case:?} disagrees at {p:?}"))?;
        }
        probes_checked += probes.len();
    }
    Ok(format!("{} datasets, {probes_checked} probe points", suite.len()))
}

fn benchmark_config(dir: &Path, data: &Path) -> RunConfig {
    PartialConfig {
        dataset: Some(data.to_path_buf()),
        seed: Some(42),
        output_dir: Some(dir.to_path_buf()),
        ..Default::default()
    }
    .resolve()
    .expect("valid config")
}

fn end_to_end(work: &Path) -> Check {
    let data = work.join("planted.csv");
    cmd_synth(&SyntheticSpec::new(5000, 4, 28, 0.5, 42), &data).map_err(|e| e.to_string())?;
    let report = cmd_benchmark(&benchmark_config(&work.join("run1"), &data)).map_err(|e| e.to_string())?;
    let layout: Vec<(Family, bool)> = report
        .benchmark
        .iter()
        .map(|r| (r.family, r.feature_selection))
        .collect();
    let expected: Vec<(Family, bool)> = Family::ALL.iter().flat_map(|&f| [(f, false), (f, true)]).collect();
    ensure(layout == expected, || format!("row layout {layout:?}"))?;
    let table = fs::read_to_string(work.join("run1/benchmark.txt")).map_err(|e| e.to_string())?;
    ensure(table.lines().count() == 8, || format!("table:\n{table}"))?;
    let worst = report
        .benchmark
        .iter()
        .map(|r| r.metrics.macro_f1)
        .fold(f64::INFINITY, f64::min);
    for r in &report.benchmark {
        ensure(r.metrics.macro_f1 >= 99.0, || {
            format!(
                "{} (selection {}) macro-F1 {:.3}",
                r.family, r.feature_selection, r.metrics.macro_f1
            )
        })?;
    }
    Ok(format!("6 rows, lowest macro-F1 {worst:.3}%"))
}

fn efficiency_direction() -> Check {
    let start = Instant::now();
    let (_, d) = planted(9);
    let fs = select_top8(&d, 9);
    let opts = BenchmarkOptions {
        repeats: 5,
        seed: 9,
        ..Default::default()
    };
    let rows = benchmark(&d, &fs, &[ModelConfig::random_forest().with_seed(9)], &opts).map_err(|e| e.to_string())?;
    let (full, reduced) = (rows[0].training_time_s, rows[1].training_time_s);
    ensure(reduced < full, || {
        format!("8 features {reduced:.4} s vs 32 features {full:.4} s")
    })?;
    within(start.elapsed(), 300.0)?;
    Ok(format!("RF median fit {full:.4} s on 32 features, {reduced:.4} s on 8"))
}

fn without_timing(path: &Path) -> Result<String, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let report = RunReport::from_json(&text, path).map_err(|e| e.to_string())?;
    let mut value = serde_json::to_value(&report).map_err(|e| e.to_string())?;
    value.as_object_mut().ok_or("report is not an object")?.remove("timing");
    serde_json::to_string_pretty(&value).map_err(|e| e.to_string())
}

fn determinism(work: &Path) -> Check {
    let data = work.join("planted.csv");
    ensure(work.join("run1/report.json").exists(), || "first run missing".into())?;
    cmd_benchmark(&benchmark_config(&work.join("run2"), &data)).map_err(|e| e.to_string())?;
    let a = without_timing(&work.join("run1/report.json"))?;
    let b = without_timing(&work.join("run2/report.json"))?;
    ensure(a == b, || "reports differ outside timing".into())?;
    for name in ["ranking.csv", "feature_set.txt"] {
        let x = fs::read(work.join("run1").join(name)).map_err(|e| e.to_string())?;
        let y = fs::read(work.join("run2").join(name)).map_err(|e| e.to_string())?;
        ensure(x == y, || format!("{name} differs"))?;
    }
    Ok(format!("{} report bytes identical outside timing", a.len()))
}

/// Returns None when no dataset is configured.
fn bot_iot_hook() -> Option<Check> {
    let path = std::env::var_os(BOT_IOT_ENV)?;
    Some((|| {
        let table = load_table(&path, &SchemaAdapter::builtin(DatasetId::BotIot)).map_err(|e| e.to_string())?;
        let top = select_top8(&table.dataset, 1);
        let top3 = &top.names[..3.min(top.names.len())];
        let wanted = ["Packets Per Second", "Total Bytes"];
        let missing: Vec<&str> = wanted
            .iter()
            .copied()
            .filter(|w| !top3.iter().any(|n| n == w))
            .collect();
        if missing.is_empty() {
            Ok(format!("top-3 {top3:?}"))
        } else {
            Err(format!("top-3 {top3:?} lacks {missing:?}"))
        }
    })())
}

fn run(id: &str, name: &str, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    match &outcome {
        Ok(detail) => println!("PASS  [{id:>2}] {name}: {detail} ({secs:.1} s)"),
        Err(detail) => println!("FAIL  [{id:>2}] {name}: {detail} ({secs:.1} s)"),
    }
    outcome.is_ok()
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let work = tempfile::tempdir().expect("temporary directory");
    let w = work.path();
    let results = [
        run("1", "selector oracle suite", selector_oracle),
        run("2", "chi-squared worked example", chi_squared_example),
        run("3", "ranking invariants", ranking_invariants),
        run("4", "planted-feature recovery", planted_recovery),
        run("5", "logistic gradient check", gradient_check),
        run("6", "histogram boosting loss monotonicity", boosting_monotonicity),
        run("7", "single-tree CART equivalence", cart_equivalence),
        run("8", "end-to-end benchmark layout and accuracy", || end_to_end(w)),
        run("9", "efficiency direction on 8 vs 32 features", efficiency_direction),
        run("10", "benchmark determinism outside timing", || determinism(w)),
    ];
    match bot_iot_hook() {
        None => println!("SKIP  [11] Bot-IoT ranking hook (non-gating): set {BOT_IOT_ENV} to a flow table"),
        Some(Ok(detail)) => println!("PASS  [11] Bot-IoT ranking hook (non-gating): {detail}"),
        Some(Err(detail)) => println!("NOTE  [11] Bot-IoT ranking hook (non-gating, deviation reported): {detail}"),
    }
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} gating criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
