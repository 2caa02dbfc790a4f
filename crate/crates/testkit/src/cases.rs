//! Deterministic families of tiny datasets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Column-major features plus labels.
#[derive(Debug, Clone)]
pub struct Case {
    pub columns: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl Case {
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.labels.len())
            .map(|i| self.columns.iter().map(|c| c[i]).collect())
            .collect()
    }

    pub fn has_both_classes(&self) -> bool {
        self.labels.contains(&0) && self.labels.contains(&1)
    }
}

/// Random datasets with 2..=`max_rows` rows, 1..=`max_features` features and
/// at most `max_distinct` distinct values per feature, drawn from a pool of
/// arbitrary reals.
pub fn random_discrete(
    seed: u64,
    count: usize,
    max_rows: usize,
    max_features: usize,
    max_distinct: usize,
) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=max_rows);
            let f = rng.random_range(1..=max_features);
            let columns = (0..f)
                .map(|_| {
                    let k = rng.random_range(1..=max_distinct);
                    let pool: Vec<f64> = (0..k).map(|_| rng.random_range(-50..50) as f64 / 4.0).collect();
                    (0..n).map(|_| pool[rng.random_range(0..k)]).collect()
                })
                .collect();
            let labels = (0..n).map(|_| rng.random_range(0..2u8)).collect();
            Case { columns, labels }
        })
        .collect()
}

fn digits(mut code: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(code % base);
        code /= base;
    }
    out
}

/// Every one-feature dataset with 2..=4 rows, values in {0, 1, 2} and both
/// classes present, followed by `random` seeded datasets of 5..=8 rows and
/// 1..=3 integer features in 0..=3, again with both classes.
pub fn cart_suite(random: usize, seed: u64) -> Vec<Case> {
    let mut cases = Vec::new();
    for n in 2..=4usize {
        for v in 0..3usize.pow(n as u32) {
            for y in 1..(1usize << n) - 1 {
                cases.push(Case {
                    columns: vec![digits(v, 3, n).into_iter().map(|d| d as f64).collect()],
                    labels: digits(y, 2, n).into_iter().map(|d| d as u8).collect(),
                });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        let n = rng.random_range(5..=8);
        let f = rng.random_range(1..=3);
        let columns = (0..f)
            .map(|_| (0..n).map(|_| rng.random_range(0..=3) as f64).collect())
            .collect();
        let mut labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
        labels[0] = 0;
        labels[1] = 1;
        labels.shuffle(&mut rng);
        cases.push(Case { columns, labels });
    }
    cases
}

/// Probe points covering every region a tree over integer features in
/// 0..=3 can distinguish.
pub fn probe_grid(n_features: usize) -> Vec<Vec<f64>> {
    let axis = [-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0];
    let mut points = vec![Vec::new()];
    for _ in 0..n_features {
        points = points
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                axis.iter().map(move |&a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    points
}


/// Raw score vectors for `methods` selectors over one random feature list.
#[derive(Debug, Clone)]
pub struct ScoreSet {
    pub features: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
}

/// Random nonnegative score sets over 1..=20 features. Values come partly
/// from a small pool so that exact ties, zeros and all-zero vectors occur.
pub fn score_sets(seed: u64, count: usize, methods: usize) -> Vec<ScoreSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let f = rng.random_range(1..=20);
            let features = (0..f).map(|j| format!("feat{j:02}")).collect();
            let vectors = (0..methods)
                .map(|_| {
                    let pool: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..50.0)).collect();
                    (0..f)
                        .map(|_| match rng.random_range(0..6) {
                            0 => 0.0,
                            1 | 2 => pool[rng.random_range(0..3)],
                            _ => rng.random_range(0.0..1e3),
                        })
                        .collect()
                })
                .collect();
            ScoreSet { features, vectors }
        })
        .collect()
}
