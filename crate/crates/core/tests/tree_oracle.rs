use flowsieve::flowdata::{generate_synthetic, SyntheticSpec};
use flowsieve::parallel;
use flowsieve::trees::{fit, fit_dataset, grad_hess, log_loss, sigmoid, Family, FittedModel, MaxFeatures, ModelConfig};
use flowsieve::Dataset;
use flowsieve_testkit::cases::{cart_suite, probe_grid};
use flowsieve_testkit::{cart, numeric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn single_cart() -> ModelConfig {
    ModelConfig {
        n_estimators: 1,
        max_depth: None,
        min_samples_leaf: 1,
        max_features: MaxFeatures::All,
        bootstrap: false,
        ..ModelConfig::random_forest()
    }
}

#[test]
fn single_tree_matches_exhaustive_cart() {
    let suite = cart_suite(600, 3);
    assert!(suite.len() >= 500);
    let cfg = single_cart();
    for case in &suite {
        let cols: Vec<&[f64]> = case.columns.iter().map(Vec::as_slice).collect();
        let model = fit(&cols, &case.labels, &cfg).unwrap();
        let oracle = cart::fit(&case.rows(), &case.labels);
        let probes = probe_grid(case.columns.len());
        let probe_cols: Vec<Vec<f64>> = (0..case.columns.len())
            .map(|j| probes.iter().map(|p| p[j]).collect())
            .collect();
        let refs: Vec<&[f64]> = probe_cols.iter().map(Vec::as_slice).collect();
        let got = model.predict(&refs).unwrap().labels;
        for (p, y) in probes.iter().zip(got) {
            assert_eq!(y, oracle.predict(p), "case {case:?} at {p:?}");
        }
    }
}

#[test]
fn gradient_and_hessian_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let p: f64 = rng.random_range(0.01..0.99);
        let y: u8 = rng.random_range(0..2);
        let z = (p / (1.0 - p)).ln();
        let (g, h) = grad_hess(sigmoid(z), y);
        let g_fd = numeric::derivative(|t| log_loss(t, y), z, 1e-3);
        let h_fd = numeric::derivative(|t| sigmoid(t) - f64::from(y), z, 1e-3);
        assert!(numeric::relative_error(g, g_fd) < 1e-6, "g at p={p} y={y}");
        assert!(numeric::relative_error(h, h_fd) < 1e-6, "h at p={p} y={y}");
    }
}

fn planted(rows: usize, seed: u64) -> (SyntheticSpec, Dataset) {
    let spec = SyntheticSpec::new(rows, 4, 28, 0.5, seed);
    let d = generate_synthetic(&spec).unwrap();
    (spec, d)
}

#[test]
fn full_batch_histogram_loss_never_increases() {
    let (_, d) = planted(2000, 1);
    let cfg = ModelConfig {
        learning_rate: 0.2,
        n_estimators: 100,
        ..ModelConfig::gbm_histogram()
    };
    let m = fit_dataset(&d, &cfg).unwrap();
    assert_eq!(m.stats.train_loss.len(), 101);
    for w in m.stats.train_loss.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
    }
}

fn quick(family: Family) -> ModelConfig {
    ModelConfig {
        n_estimators: 15,
        ..ModelConfig::for_family(family)
    }
    .with_seed(9)
}

#[test]
fn fits_are_reproducible_and_thread_independent() {
    let (_, d) = planted(600, 2);
    for family in Family::ALL {
        let cfg = quick(family);
        let a = fit_dataset(&d, &cfg).unwrap();
        let b = parallel::serial_scope(|| fit_dataset(&d, &cfg).unwrap());
        assert_eq!(a, b, "{family}");
        assert_eq!(a.predict_dataset(&d).unwrap(), b.predict_dataset(&d).unwrap());
        let other = fit_dataset(&d, &cfg.clone().with_seed(10)).unwrap();
        assert_ne!(a.trees, other.trees, "{family} ignores its seed");
    }
}

#[test]
fn json_round_trip_preserves_predictions_bit_for_bit() {
    let (_, d) = planted(400, 3);
    for family in Family::ALL {
        let m = fit_dataset(&d, &quick(family)).unwrap();
        let back = FittedModel::from_json(&m.to_json()).unwrap();
        let (p, q) = (m.predict_dataset(&d).unwrap(), back.predict_dataset(&d).unwrap());
        assert_eq!(p.labels, q.labels);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&p.probabilities), bits(&q.probabilities));
    }
}

#[test]
fn fewer_columns_never_need_more_split_evaluations() {
    let (spec, d) = planted(1500, 4);
    let mut subset = spec.informative_features();
    subset.extend(
        d.feature_names()
            .iter()
            .filter(|n| !subset.contains(n))
            .take(4)
            .cloned()
            .collect::<Vec<_>>(),
    );
    let small = d.select_features(&subset).unwrap();
    for family in Family::ALL {
        let cfg = quick(family);
        let full = fit_dataset(&d, &cfg).unwrap().stats.split_evaluations;
        let reduced = fit_dataset(&small, &cfg).unwrap().stats.split_evaluations;
        assert!(reduced <= full, "{family}: {reduced} > {full}");
    }
}

#[test]
fn importances_sum_to_one_when_any_split_exists() {
    let (_, d) = planted(300, 5);
    for family in Family::ALL {
        let imp = fit_dataset(&d, &quick(family)).unwrap().feature_importance();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
