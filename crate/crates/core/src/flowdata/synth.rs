use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Parameters for a planted-signal dataset. Informative features are
/// unit-variance normals whose mean moves by `separation` standard deviations
/// on malicious rows; noise features are standard normals for both classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_rows: usize,
    pub n_informative: usize,
    pub n_noise: usize,
    /// Fraction of malicious rows, in (0, 1).
    pub class_balance: f64,
    pub seed: u64,
    #[serde(default = "default_separation")]
    pub separation: f64,
}

fn default_separation() -> f64 {
    4.0
}

impl SyntheticSpec {
    pub fn new(n_rows: usize, n_informative: usize, n_noise: usize, class_balance: f64, seed: u64) -> Self {
        SyntheticSpec {
            n_rows,
            n_informative,
            n_noise,
            class_balance,
            seed,
            separation: default_separation(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 rows, got {}",
                self.n_rows
            )));
        }
        if self.n_informative < 1 {
            return Err(Error::InvalidArgument("need at least one informative feature".into()));
        }
        if !(self.class_balance > 0.0 && self.class_balance < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "class balance must lie in (0, 1), got {}",
                self.class_balance
            )));
        }
        if !(self.separation.is_finite() && self.separation >= 2.0) {
            return Err(Error::InvalidArgument(format!(
                "separation must be at least 2 standard deviations, got {}",
                self.separation
            )));
        }
        Ok(())
    }

    pub fn feature_count(&self) -> usize {
        self.n_informative + self.n_noise
    }

    fn feature_name(i: usize) -> String {
        format!("f{i:02}")
    }

    /// Column positions holding the planted signal, ascending.
    fn informative_positions(&self) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        let mut pos: Vec<usize> = (0..self.feature_count()).collect();
        pos.shuffle(&mut rng);
        let mut pos = pos[..self.n_informative].to_vec();
        pos.sort_unstable();
        pos
    }

    /// Names of the informative columns in the generated dataset.
    pub fn informative_features(&self) -> Vec<String> {
        self.informative_positions()
            .into_iter()
            .map(Self::feature_name)
            .collect()
    }
}

/// Generates the dataset described by `spec`; bit-identical for equal specs.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n_rows;
    let n_mal = ((n as f64 * spec.class_balance + 0.5).floor() as usize).clamp(1, n - 1);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i >= n - n_mal)).collect();
    labels.shuffle(&mut rng);

    let informative = spec.informative_positions();
    let f = spec.feature_count();
    let mut columns = Vec::with_capacity(f);
    for j in 0..f {
        let mut col_rng = ChaCha8Rng::seed_from_u64(spec.seed);
        col_rng.set_stream(2 + j as u64);
        let shift = if informative.binary_search(&j).is_ok() {
            spec.separation
        } else {
            0.0
        };
        let col = labels
            .iter()
            .map(|&l| {
                let z: f64 = StandardNormal.sample(&mut col_rng);
                z + shift * f64::from(l)
            })
            .collect();
        columns.push(col);
    }
    let names = (0..f).map(SyntheticSpec::feature_name).collect();
    Dataset::new(names, columns, labels)
}
