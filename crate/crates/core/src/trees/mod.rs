//! Tree-ensemble learners: a Gini random forest, level-wise histogram
//! gradient boosting and leaf-wise boosting with gradient-based one-side
//! sampling (GOSS). Inputs are column-major: `cols[feature][row]`.

mod boost;
mod cart;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowdata::Dataset;

pub use boost::{grad_hess, log_loss, sigmoid};
pub(crate) use cart::ColumnIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    RandomForest,
    GbmHistogram,
    GbmGoss,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::RandomForest, Family::GbmHistogram, Family::GbmGoss];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::RandomForest => "random_forest",
            Family::GbmHistogram => "gbm_histogram",
            Family::GbmGoss => "gbm_goss",
        }
    }

    /// Short label used in rendered tables.
    pub fn label(self) -> &'static str {
        match self {
            Family::RandomForest => "RF",
            Family::GbmHistogram => "GBM-Hist",
            Family::GbmGoss => "GBM-GOSS",
        }
    }

    pub fn is_boosted(self) -> bool {
        !matches!(self, Family::RandomForest)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_").to_ascii_lowercase();
        match norm.as_str() {
            "random_forest" | "rf" => Ok(Family::RandomForest),
            "gbm_histogram" | "gbm_hist" | "xgb" => Ok(Family::GbmHistogram),
            "gbm_goss" | "goss" | "lgbm" => Ok(Family::GbmGoss),
            _ => Err(Error::InvalidArgument(format!("unknown model family `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Gini,
    CrossEntropy,
}

/// Candidate features examined at each forest split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let m = match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Count(c) => c,
        };
        m.clamp(1, n_features.max(1))
    }
}

/// Hyperparameters for one ensemble. Fields a family does not use are
/// ignored (e.g. `learning_rate` for the forest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub family: Family,
    pub objective: Objective,
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: Option<usize>,
    pub max_leaves: Option<usize>,
    pub min_samples_leaf: usize,
    /// Per-split candidate features (forest).
    pub max_features: MaxFeatures,
    /// Bootstrap rows per tree (forest).
    pub bootstrap: bool,
    /// Fraction of columns drawn once per tree (boosting).
    pub feature_subsample: f64,
    /// Minimum split gain, gamma (boosting).
    pub min_loss_reduction: f64,
    /// Leaf L2 penalty, lambda (boosting).
    pub l2_regularization: f64,
    pub histogram_bins: usize,
    pub goss_top_fraction: f64,
    pub goss_other_fraction: f64,
    pub seed: u64,
}

impl ModelConfig {
    /// Gini forest: 100 trees, sqrt(F) candidates per split, depth 16,
    /// leaves of at least 2 samples.
    pub fn random_forest() -> Self {
        ModelConfig {
            family: Family::RandomForest,
            objective: Objective::Gini,
            n_estimators: 100,
            learning_rate: 1.0,
            max_depth: Some(16),
            max_leaves: None,
            min_samples_leaf: 2,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            feature_subsample: 1.0,
            min_loss_reduction: 0.0,
            l2_regularization: 0.0,
            histogram_bins: 256,
            goss_top_fraction: 0.2,
            goss_other_fraction: 0.1,
            seed: 0,
        }
    }

    /// Histogram boosting: cross-entropy, lr 0.2, 100 rounds, 0.8 of the
    /// columns per tree, gamma 0.01, depth 8, 256 bins.
    pub fn gbm_histogram() -> Self {
        ModelConfig {
            family: Family::GbmHistogram,
            objective: Objective::CrossEntropy,
            n_estimators: 100,
            learning_rate: 0.2,
            max_depth: Some(8),
            max_leaves: None,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
            bootstrap: false,
            feature_subsample: 0.8,
            min_loss_reduction: 0.01,
            l2_regularization: 1.0,
            histogram_bins: 256,
            goss_top_fraction: 0.2,
            goss_other_fraction: 0.1,
            seed: 0,
        }
    }

    /// GOSS boosting: cross-entropy, lr 0.1, 100 rounds, 0.7 of the columns
    /// per tree, gamma 0.01, 32 leaves of at least 16 rows.
    pub fn gbm_goss() -> Self {
        ModelConfig {
            family: Family::GbmGoss,
            learning_rate: 0.1,
            max_depth: None,
            max_leaves: Some(32),
            min_samples_leaf: 16,
            feature_subsample: 0.7,
            ..ModelConfig::gbm_histogram()
        }
    }

    pub fn for_family(family: Family) -> Self {
        match family {
            Family::RandomForest => ModelConfig::random_forest(),
            Family::GbmHistogram => ModelConfig::gbm_histogram(),
            Family::GbmGoss => ModelConfig::gbm_goss(),
        }
    }

    /// The forest used inside recursive feature elimination: 20 trees.
    pub fn rfe_default() -> Self {
        ModelConfig {
            n_estimators: 20,
            ..ModelConfig::random_forest()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        let expected = if self.family.is_boosted() {
            Objective::CrossEntropy
        } else {
            Objective::Gini
        };
        if self.objective != expected {
            return bad(format!("{} requires the {:?} objective", self.family, expected));
        }
        if self.n_estimators == 0 {
            return bad("n_estimators must be positive".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be at least 1".into());
        }
        if let MaxFeatures::Count(0) = self.max_features {
            return bad("max_features must be at least 1".into());
        }
        if !(self.feature_subsample > 0.0 && self.feature_subsample <= 1.0) {
            return bad(format!(
                "feature subsample must lie in (0, 1], got {}",
                self.feature_subsample
            ));
        }
        if !(self.min_loss_reduction.is_finite() && self.min_loss_reduction >= 0.0) {
            return bad("min loss reduction must be nonnegative".into());
        }
        if !(self.l2_regularization.is_finite() && self.l2_regularization >= 0.0) {
            return bad("l2 regularization must be nonnegative".into());
        }
        if !(2..=u16::MAX as usize).contains(&self.histogram_bins) {
            return bad(format!(
                "histogram bins must lie in 2..=65535, got {}",
                self.histogram_bins
            ));
        }
        if matches!(self.max_leaves, Some(l) if l < 2) {
            return bad("max_leaves must be at least 2".into());
        }
        if self.family == Family::GbmGoss {
            let (a, b) = (self.goss_top_fraction, self.goss_other_fraction);
            if !((0.0..1.0).contains(&a) && b > 0.0 && b <= 1.0 && a + b <= 1.0) {
                return bad(format!("invalid GOSS fractions: top {a}, other {b}"));
            }
        }
        Ok(())
    }
}

/// Node of a fitted tree, stored in an arena; the root is index 0. Rows with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        n_samples: u64,
    },
    /// Class vote (0 or 1) for forest trees; additive log-odds for boosted
    /// trees.
    Leaf { value: f64, n_samples: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict_row(&self, value_at: impl Fn(usize) -> f64) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if value_at(*feature) <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn split_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Split { .. }))
            .count()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.len() - self.split_count()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(t, *left).max(walk(t, *right)),
            }
        }
        walk(self, 0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitStats {
    /// Candidate thresholds scored during split search.
    pub split_evaluations: u64,
    /// Mean training cross-entropy before the first round and after each
    /// round (boosting only).
    pub train_loss: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub config: ModelConfig,
    pub n_features: usize,
    pub trees: Vec<Tree>,
    /// Prior log-odds added to boosted outputs; 0 for forests.
    pub base_score: f64,
    pub feature_importances: Vec<f64>,
    pub stats: FitStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Vec<u8>,
    /// Malicious-class probability (vote fraction for forests).
    pub probabilities: Vec<f64>,
}

const MODEL_FORMAT: &str = "flowsieve-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    model: FittedModel,
}

/// 1 − Σ p_c².
pub fn gini(counts: &[u64]) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("gini impurity of an empty node".into()));
    }
    let t = total as f64;
    Ok(1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>())
}

fn check_inputs(cols: &[&[f64]], labels: &[u8]) -> Result<()> {
    if cols.is_empty() || labels.is_empty() {
        return Err(Error::InvalidArgument("cannot fit on empty data".into()));
    }
    if let Some(c) = cols.iter().find(|c| c.len() != labels.len()) {
        return Err(Error::InvalidArgument(format!(
            "column has {} rows but there are {} labels",
            c.len(),
            labels.len()
        )));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
    }
    let malicious = labels.iter().filter(|&&l| l == 1).count();
    if malicious == 0 || malicious == labels.len() {
        return Err(Error::SingleClass {
            benign: labels.len() - malicious,
            malicious,
        });
    }
    if labels.len() > u32::MAX as usize {
        return Err(Error::InvalidArgument("too many rows".into()));
    }
    Ok(())
}

pub fn fit_random_forest(cols: &[&[f64]], labels: &[u8], cfg: &ModelConfig) -> Result<FittedModel> {
    if cfg.family != Family::RandomForest {
        return Err(Error::InvalidArgument(format!(
            "{} config passed to the forest learner",
            cfg.family
        )));
    }
    cfg.validate()?;
    check_inputs(cols, labels)?;
    Ok(cart::fit_forest(cols, labels, cfg))
}

pub fn fit_gbm(cols: &[&[f64]], labels: &[u8], cfg: &ModelConfig) -> Result<FittedModel> {
    if !cfg.family.is_boosted() {
        return Err(Error::InvalidArgument(format!(
            "{} config passed to the boosting learner",
            cfg.family
        )));
    }
    cfg.validate()?;
    check_inputs(cols, labels)?;
    Ok(boost::fit_boosted(cols, labels, cfg))
}

/// Fits `cfg` on the columns `subset` of `cols`. Forests reuse the
/// precomputed column orderings in `index`, which must align with `cols`.
pub(crate) fn fit_subset(
    cols: &[&[f64]],
    index: &[cart::ColumnIndex],
    subset: &[usize],
    labels: &[u8],
    cfg: &ModelConfig,
) -> Result<FittedModel> {
    let sub_cols: Vec<&[f64]> = subset.iter().map(|&j| cols[j]).collect();
    if cfg.family != Family::RandomForest {
        return fit(&sub_cols, labels, cfg);
    }
    cfg.validate()?;
    check_inputs(&sub_cols, labels)?;
    let sub_index: Vec<&cart::ColumnIndex> = subset.iter().map(|&j| &index[j]).collect();
    Ok(cart::fit_forest_indexed(&sub_cols, &sub_index, labels, cfg))
}

/// Fits whichever family `cfg` names.
pub fn fit(cols: &[&[f64]], labels: &[u8], cfg: &ModelConfig) -> Result<FittedModel> {
    match cfg.family {
        Family::RandomForest => fit_random_forest(cols, labels, cfg),
        Family::GbmHistogram | Family::GbmGoss => fit_gbm(cols, labels, cfg),
    }
}

pub fn fit_dataset(d: &Dataset, cfg: &ModelConfig) -> Result<FittedModel> {
    fit(&d.column_refs(), d.labels(), cfg)
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter_mut().for_each(|x| *x /= total);
    }
    v
}

impl FittedModel {
    /// Labels and malicious-class probabilities. Forests vote (ties go to
    /// malicious); boosted models threshold sigmoid(raw score) at 0.5.
    pub fn predict(&self, cols: &[&[f64]]) -> Result<Prediction> {
        if cols.len() != self.n_features {
            return Err(Error::FeatureCountMismatch {
                expected: self.n_features,
                got: cols.len(),
            });
        }
        let n = cols.first().map_or(0, |c| c.len());
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidArgument("prediction columns differ in length".into()));
        }
        let mut labels = Vec::with_capacity(n);
        let mut probabilities = Vec::with_capacity(n);
        let n_trees = self.trees.len();
        #[allow(clippy::needless_range_loop)]
        for row in 0..n {
            let at = |f: usize| cols[f][row];
            if self.config.family.is_boosted() {
                let raw = self.base_score + self.trees.iter().map(|t| t.predict_row(at)).sum::<f64>();
                let p = sigmoid(raw);
                labels.push(u8::from(p >= 0.5));
                probabilities.push(p);
            } else {
                let votes = self.trees.iter().filter(|t| t.predict_row(at) >= 0.5).count();
                labels.push(u8::from(2 * votes >= n_trees));
                probabilities.push(votes as f64 / n_trees as f64);
            }
        }
        Ok(Prediction { labels, probabilities })
    }

    pub fn predict_dataset(&self, d: &Dataset) -> Result<Prediction> {
        self.predict(&d.column_refs())
    }

    /// Impurity decrease (forest) or split gain (boosting) per feature,
    /// summing to 1, or all zeros when no tree split.
    pub fn feature_importance(&self) -> Vec<f64> {
        self.feature_importances.clone()
    }

    /// Versioned JSON document holding config, trees and base score.
    pub fn to_json(&self) -> String {
        let doc = ModelDocument {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<FittedModel> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!("unexpected format `{}`", doc.format)));
        }
        if doc.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {}", doc.version)));
        }
        Ok(doc.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[5, 5]).unwrap(), 0.5);
        assert_eq!(gini(&[10, 0]).unwrap(), 0.0);
        assert!((gini(&[3, 1]).unwrap() - 0.375).abs() < 1e-15);
        assert!(gini(&[0, 0]).is_err());
    }

    #[test]
    fn default_configs_validate() {
        for f in Family::ALL {
            let c = ModelConfig::for_family(f);
            c.validate().unwrap();
            assert_eq!(c.family, f);
        }
        let rf = ModelConfig::random_forest();
        assert_eq!((rf.n_estimators, rf.max_depth, rf.min_samples_leaf), (100, Some(16), 2));
        let h = ModelConfig::gbm_histogram();
        assert_eq!(
            (h.learning_rate, h.max_depth, h.min_loss_reduction),
            (0.2, Some(8), 0.01)
        );
        let g = ModelConfig::gbm_goss();
        assert_eq!(
            (g.max_leaves, g.min_samples_leaf, g.feature_subsample),
            (Some(32), 16, 0.7)
        );
    }

    #[test]
    fn invalid_goss_fractions() {
        let mut c = ModelConfig::gbm_goss();
        c.goss_top_fraction = 0.8;
        c.goss_other_fraction = 0.5;
        assert!(c.validate().is_err());
        c.goss_top_fraction = 0.2;
        c.goss_other_fraction = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn sqrt_candidates() {
        assert_eq!(MaxFeatures::Sqrt.resolve(32), 5);
        assert_eq!(MaxFeatures::Sqrt.resolve(8), 2);
        assert_eq!(MaxFeatures::Sqrt.resolve(2), 1);
        assert_eq!(MaxFeatures::Count(50).resolve(8), 8);
    }

    fn vote_model(votes: &[f64]) -> FittedModel {
        FittedModel {
            config: ModelConfig::random_forest(),
            n_features: 1,
            trees: votes
                .iter()
                .map(|&v| Tree {
                    nodes: vec![TreeNode::Leaf { value: v, n_samples: 1 }],
                })
                .collect(),
            base_score: 0.0,
            feature_importances: vec![0.0],
            stats: FitStats::default(),
        }
    }

    #[test]
    fn forest_vote_rule() {
        let p = vote_model(&[1.0, 1.0, 0.0]).predict(&[&[0.0]]).unwrap();
        assert_eq!(p.labels, vec![1]);
        assert!((p.probabilities[0] - 2.0 / 3.0).abs() < 1e-15);
        let p = vote_model(&[1.0, 0.0]).predict(&[&[0.0]]).unwrap();
        assert_eq!(p.labels, vec![1]);
        assert_eq!(p.probabilities, vec![0.5]);
    }

    #[test]
    fn zero_leaf_boosted_model_returns_prior() {
        let mut m = vote_model(&[0.0, 0.0]);
        m.config = ModelConfig::gbm_histogram();
        m.base_score = -1.25;
        let p = m.predict(&[&[3.0, 4.0]]).unwrap();
        assert_eq!(p.probabilities, vec![sigmoid(-1.25); 2]);
        assert_eq!(p.labels, vec![0, 0]);
    }

    #[test]
    fn feature_count_is_checked() {
        let m = vote_model(&[1.0]);
        assert!(matches!(
            m.predict(&[&[0.0], &[1.0]]),
            Err(Error::FeatureCountMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn fit_rejects_single_class_and_wrong_family() {
        let x = [0.0, 1.0, 2.0];
        assert!(matches!(
            fit(&[&x], &[1, 1, 1], &ModelConfig::random_forest()),
            Err(Error::SingleClass { .. })
        ));
        assert!(fit(&[], &[], &ModelConfig::gbm_goss()).is_err());
        assert!(fit_gbm(&[&x], &[0, 1, 1], &ModelConfig::random_forest()).is_err());
        assert!(fit_random_forest(&[&x], &[0, 1, 1], &ModelConfig::gbm_goss()).is_err());
    }

    #[test]
    fn json_rejects_foreign_documents() {
        assert!(FittedModel::from_json("{}").is_err());
        let m = vote_model(&[1.0]);
        let text = m.to_json().replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(FittedModel::from_json(&text), Err(Error::ModelFormat(_))));
    }
}
