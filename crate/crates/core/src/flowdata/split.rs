use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Train/test row indices for one cross-validation fold. Both lists are
/// sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold_index: usize,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

fn shuffled_class_rows(d: &Dataset, rng: &mut ChaCha8Rng) -> [Vec<usize>; 2] {
    let mut by_class = [Vec::new(), Vec::new()];
    for (i, &l) in d.labels().iter().enumerate() {
        by_class[l as usize].push(i);
    }
    for rows in &mut by_class {
        rows.shuffle(rng);
    }
    by_class
}

/// Stratified k-fold: each class is shuffled and dealt round-robin over the
/// folds, so every test fold holds ⌊n_c/k⌋ or ⌈n_c/k⌉ rows of class c.
pub fn stratified_kfold(d: &Dataset, k: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k-fold needs k >= 2, got {k}")));
    }
    let counts = d.class_counts();
    for (class, &count) in counts.iter().enumerate() {
        if count < k {
            return Err(Error::TooFewRows {
                class: class as u8,
                count,
                k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let by_class = shuffled_class_rows(d, &mut rng);

    let mut tests: Vec<Vec<usize>> = vec![Vec::new(); k];
    // Class 1 continues the deal where class 0 stopped, which evens out the
    // total fold sizes.
    let mut offset = 0;
    for rows in &by_class {
        for (pos, &row) in rows.iter().enumerate() {
            tests[(offset + pos) % k].push(row);
        }
        offset = (offset + rows.len()) % k;
    }

    let n = d.row_count();
    Ok(tests
        .into_iter()
        .enumerate()
        .map(|(fold_index, mut test_rows)| {
            test_rows.sort_unstable();
            let mut in_test = vec![false; n];
            for &r in &test_rows {
                in_test[r] = true;
            }
            let train_rows = (0..n).filter(|&r| !in_test[r]).collect();
            FoldSplit {
                fold_index,
                train_rows,
                test_rows,
            }
        })
        .collect())
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Stratified holdout indices `(train, test)`, each sorted. Class c
/// contributes round-half-up(n_c · test_fraction) test rows; a fraction that
/// would leave either side of a class empty is rejected.
pub fn holdout_indices(d: &Dataset, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let counts = d.class_counts();
    for (class, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(Error::TooFewRows {
                class: class as u8,
                count,
                k: 2,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let by_class = shuffled_class_rows(d, &mut rng);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (class, rows) in by_class.iter().enumerate() {
        let n_test = round_half_up(rows.len() as f64 * test_fraction);
        if n_test == 0 || n_test == rows.len() {
            return Err(Error::InvalidArgument(format!(
                "test fraction {test_fraction} leaves an empty side for class {class} ({} rows)",
                rows.len()
            )));
        }
        test.extend_from_slice(&rows[..n_test]);
        train.extend_from_slice(&rows[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified holdout split into `(train, test)` datasets.
pub fn holdout_split(d: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = holdout_indices(d, test_fraction, seed)?;
    Ok((d.take_rows(&train), d.take_rows(&test)))
}
