//! Python bindings: datasets, the five selectors, the combined ranking, model
//! fitting and the confusion metrics.

use flowsieve::evaluation::{confusion, metrics as core_metrics};
use flowsieve::flowdata::{generate_synthetic, SyntheticSpec};
use flowsieve::ranking;
use flowsieve::selectors::{score_all as core_score_all, DiscretizationConfig};
use flowsieve::trees::{self, FittedModel, ModelConfig};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: flowsieve::Error) -> PyErr {
    match e {
        flowsieve::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A labeled table of numeric feature columns; labels are 0 (benign) or 1.
#[pyclass(name = "Dataset", frozen)]
struct PyDataset {
    inner: flowsieve::Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(feature_names: Vec<String>, columns: Vec<Vec<f64>>, labels: Vec<u8>) -> PyResult<Self> {
        let inner = flowsieve::Dataset::new(feature_names, columns, labels).map_err(to_py)?;
        Ok(PyDataset { inner })
    }

    /// Gaussian-shifted informative features plus pure-noise features.
    #[staticmethod]
    #[pyo3(signature = (rows, informative, noise, balance = 0.5, seed = 0))]
    fn synthetic(rows: usize, informative: usize, noise: usize, balance: f64, seed: u64) -> PyResult<Self> {
        let spec = SyntheticSpec::new(rows, informative, noise, balance, seed);
        Ok(PyDataset {
            inner: generate_synthetic(&spec).map_err(to_py)?,
        })
    }

    /// Reads the canonical CSV written by `flowsieve synth`.
    #[staticmethod]
    fn load_csv(path: &str) -> PyResult<Self> {
        Ok(PyDataset {
            inner: flowsieve::Dataset::load_canonical(path).map_err(to_py)?,
        })
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names().to_vec()
    }

    #[getter]
    fn labels(&self) -> Vec<u8> {
        self.inner.labels().to_vec()
    }

    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.column_by_name(name).map_err(to_py)?.to_vec())
    }

    fn select_features(&self, names: Vec<String>) -> PyResult<Self> {
        Ok(PyDataset {
            inner: self.inner.select_features(&names).map_err(to_py)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.row_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(rows={}, features={})",
            self.inner.row_count(),
            self.inner.feature_count()
        )
    }
}

fn rfe_config(rfe_estimators: usize) -> ModelConfig {
    ModelConfig {
        n_estimators: rfe_estimators,
        ..ModelConfig::rfe_default()
    }
}

/// Raw scores of every selector, keyed by method name.
#[pyfunction]
#[pyo3(signature = (dataset, seed = 0, rfe_estimators = 20))]
fn score_all<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    seed: u64,
    rfe_estimators: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let raw = py
        .detach(|| {
            core_score_all(
                &dataset.inner,
                &DiscretizationConfig::default(),
                &rfe_config(rfe_estimators),
                seed,
            )
        })
        .map_err(to_py)?;
    let out = PyDict::new(py);
    for m in raw {
        out.set_item(m.method.as_str(), m.scores)?;
    }
    Ok(out)
}

type RankOutput = (Vec<(String, f64)>, Vec<String>);

/// Combined ranking as `(feature, percent)` pairs, best first, and the names
/// of the top `k`.
#[pyfunction]
#[pyo3(signature = (dataset, k = 8, seed = 0, rfe_estimators = 20))]
fn rank(py: Python<'_>, dataset: &PyDataset, k: usize, seed: u64, rfe_estimators: usize) -> PyResult<RankOutput> {
    let (ranking, set) = py
        .detach(|| {
            let raw = core_score_all(
                &dataset.inner,
                &DiscretizationConfig::default(),
                &rfe_config(rfe_estimators),
                seed,
            )?;
            let (_, ranking) = ranking::combine(&raw)?;
            let set = ranking::top_k(&ranking, k)?;
            Ok::<_, flowsieve::Error>((ranking, set))
        })
        .map_err(to_py)?;
    let pairs = ranking.entries.into_iter().map(|e| (e.feature, e.percent)).collect();
    Ok((pairs, set.names))
}

/// A fitted forest or boosted ensemble.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: FittedModel,
}

#[pymethods]
impl PyModel {
    /// Fits `family` ("random_forest", "gbm_histogram" or "gbm_goss") with its
    /// default hyperparameters.
    #[staticmethod]
    #[pyo3(signature = (dataset, family = "random_forest", seed = 0, n_estimators = None))]
    fn fit(
        py: Python<'_>,
        dataset: &PyDataset,
        family: &str,
        seed: u64,
        n_estimators: Option<usize>,
    ) -> PyResult<Self> {
        let family: trees::Family = family.parse().map_err(to_py)?;
        let mut cfg = ModelConfig::for_family(family).with_seed(seed);
        if let Some(n) = n_estimators {
            cfg.n_estimators = n;
        }
        let inner = py.detach(|| trees::fit_dataset(&dataset.inner, &cfg)).map_err(to_py)?;
        Ok(PyModel { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: FittedModel::from_json(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn predict(&self, dataset: &PyDataset) -> PyResult<Vec<u8>> {
        Ok(self.inner.predict_dataset(&dataset.inner).map_err(to_py)?.labels)
    }

    /// Malicious-class probability per row.
    fn predict_proba(&self, dataset: &PyDataset) -> PyResult<Vec<f64>> {
        Ok(self.inner.predict_dataset(&dataset.inner).map_err(to_py)?.probabilities)
    }

    #[getter]
    fn feature_importances(&self) -> Vec<f64> {
        self.inner.feature_importance()
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.config.family.as_str()
    }
}

/// Confusion counts and percentage metrics with malicious as positive.
#[pyfunction]
fn metrics<'py>(py: Python<'py>, y_true: Vec<u8>, y_pred: Vec<u8>) -> PyResult<Bound<'py, PyDict>> {
    let c = confusion(&y_true, &y_pred).map_err(to_py)?;
    let m = core_metrics(&c).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("tp", c.tp)?;
    out.set_item("fp", c.fp)?;
    out.set_item("tn", c.tn)?;
    out.set_item("fn", c.fn_)?;
    out.set_item("acc", m.acc)?;
    out.set_item("prc", m.prc)?;
    out.set_item("rcl", m.rcl)?;
    out.set_item("f1s", m.f1s)?;
    out.set_item("fpr", m.fpr)?;
    out.set_item("macro_f1", m.macro_f1)?;
    out.set_item("undefined", m.undefined)?;
    Ok(out)
}

#[pymodule]
fn flowsieve_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", flowsieve::VERSION)?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(score_all, m)?)?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    Ok(())
}
