use serde::{Deserialize, Serialize};

use super::metrics::{confusion, metrics, ConfusionMatrix, Metrics};
use crate::error::{Error, Result};
use crate::flowdata::{stratified_kfold, Dataset};
use crate::parallel;
use crate::trees::{self, Family, ModelConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold_index: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<FoldResult>,
    pub mean_macro_f1: f64,
}

impl CvResult {
    /// Sum of the fold confusion matrices.
    pub fn pooled(&self) -> ConfusionMatrix {
        self.folds
            .iter()
            .fold(ConfusionMatrix::default(), |acc, f| acc + f.confusion)
    }
}

/// Fits `cfg` on each stratified fold's training rows and scores the held-out
/// rows. `seed` drives the fold assignment; the model keeps `cfg.seed`.
pub fn cross_validate(d: &Dataset, cfg: &ModelConfig, k: usize, seed: u64) -> Result<CvResult> {
    let splits = stratified_kfold(d, k, seed)?;
    let folds = parallel::map_range(splits.len(), |i| {
        let s = &splits[i];
        let train = d.take_rows(&s.train_rows);
        let test = d.take_rows(&s.test_rows);
        let model = trees::fit_dataset(&train, cfg)?;
        let pred = model.predict_dataset(&test)?;
        let confusion = confusion(test.labels(), &pred.labels)?;
        Ok(FoldResult {
            fold_index: s.fold_index,
            metrics: metrics(&confusion)?,
            confusion,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mean_macro_f1 = folds.iter().map(|f| f.metrics.macro_f1).sum::<f64>() / folds.len() as f64;
    Ok(CvResult { folds, mean_macro_f1 })
}

/// Hyperparameter grid for one family: the cartesian product of the three
/// axes applied over `base`, estimators outermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub base: ModelConfig,
    pub n_estimators: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub feature_subsample: Vec<f64>,
}

impl GridSpec {
    /// A single-point grid at `base`.
    pub fn single(base: ModelConfig) -> GridSpec {
        GridSpec {
            n_estimators: vec![base.n_estimators],
            learning_rate: vec![base.learning_rate],
            feature_subsample: vec![base.feature_subsample],
            base,
        }
    }

    /// Ranges the tuned configurations were drawn from: the forest is fixed;
    /// histogram boosting searches 80–100 rounds and 0.7–0.8 column
    /// subsampling at lr 0.2; GOSS searches 100–120 rounds and lr 0.01–0.2.
    pub fn default_for(family: Family) -> GridSpec {
        let base = ModelConfig::for_family(family);
        match family {
            Family::RandomForest => GridSpec::single(base),
            Family::GbmHistogram => GridSpec {
                n_estimators: vec![80, 90, 100],
                learning_rate: vec![0.2],
                feature_subsample: vec![0.7, 0.8],
                base,
            },
            Family::GbmGoss => GridSpec {
                n_estimators: vec![100, 110, 120],
                learning_rate: vec![0.01, 0.05, 0.1, 0.2],
                feature_subsample: vec![0.7],
                base,
            },
        }
    }

    pub fn with_seed(mut self, seed: u64) -> GridSpec {
        self.base.seed = seed;
        self
    }

    pub fn points(&self) -> Vec<ModelConfig> {
        let mut out = Vec::new();
        for &n_estimators in &self.n_estimators {
            for &learning_rate in &self.learning_rate {
                for &feature_subsample in &self.feature_subsample {
                    out.push(ModelConfig {
                        n_estimators,
                        learning_rate,
                        feature_subsample,
                        ..self.base.clone()
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub feature_subsample: f64,
    pub mean_macro_f1: f64,
    pub fold_macro_f1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub family: Family,
    pub best: ModelConfig,
    pub table: Vec<GridRow>,
}

/// Cross-validates every grid point. The winner has the highest mean
/// macro-F1; ties go to fewer estimators, then the lower learning rate, then
/// the earlier point.
pub fn grid_search(d: &Dataset, grid: &GridSpec, k: usize, seed: u64) -> Result<GridResult> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty hyperparameter grid".into()));
    }
    let mut table = Vec::with_capacity(points.len());
    for cfg in &points {
        let cv = cross_validate(d, cfg, k, seed)?;
        table.push(GridRow {
            n_estimators: cfg.n_estimators,
            learning_rate: cfg.learning_rate,
            feature_subsample: cfg.feature_subsample,
            mean_macro_f1: cv.mean_macro_f1,
            fold_macro_f1: cv.folds.iter().map(|f| f.metrics.macro_f1).collect(),
        });
    }
    let winner = (0..table.len())
        .min_by(|&a, &b| {
            let (ra, rb) = (&table[a], &table[b]);
            rb.mean_macro_f1
                .total_cmp(&ra.mean_macro_f1)
                .then(ra.n_estimators.cmp(&rb.n_estimators))
                .then(ra.learning_rate.total_cmp(&rb.learning_rate))
                .then(a.cmp(&b))
        })
        .expect("nonempty grid");
    Ok(GridResult {
        family: grid.base.family,
        best: points[winner].clone(),
        table,
    })
}
