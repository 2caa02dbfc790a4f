//! Labeled flow tables: the in-memory [`Dataset`], schema adapters for the
//! public IoT captures, delimited-text loading, synthetic generation and
//! stratified splitting.

mod adapter;
mod load;
mod split;
mod synth;

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use adapter::{DatasetId, SchemaAdapter, CANONICAL_FEATURES};
pub use load::{load_table, load_table_from_str, LoadReport, LoadedTable};
pub use split::{holdout_indices, holdout_split, stratified_kfold, FoldSplit};
pub use synth::{generate_synthetic, SyntheticSpec};

/// Header of the label column in the canonical on-disk form.
pub const CANONICAL_LABEL: &str = "label";

/// Column-oriented table of numeric features with binary labels
/// (0 = benign, 1 = malicious). Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    feature_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, columns: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        if feature_names.len() != columns.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                columns.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidDataset(format!("duplicate feature name `{name}`")));
            }
        }
        let rows = labels.len();
        for (name, col) in feature_names.iter().zip(&columns) {
            if col.len() != rows {
                return Err(Error::InvalidDataset(format!(
                    "column `{name}` has {} values, expected {rows}",
                    col.len()
                )));
            }
            if let Some(v) = col.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "column `{name}` holds non-finite value {v}"
                )));
            }
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidDataset(format!("label {l} is not binary")));
        }
        Ok(Dataset {
            feature_names,
            columns,
            labels,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> &[f64] {
        &self.columns[index]
    }

    /// Borrowed view of every column, the input shape the tree learners take.
    pub fn column_refs(&self) -> Vec<&[f64]> {
        self.columns.iter().map(Vec::as_slice).collect()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row_count(&self) -> usize {
        self.labels.len()
    }

    pub fn feature_count(&self) -> usize {
        self.columns.len()
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.feature_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    pub fn column_by_name(&self, name: &str) -> Result<&[f64]> {
        Ok(self.column(self.feature_index(name)?))
    }

    /// `[benign, malicious]` row counts.
    pub fn class_counts(&self) -> [usize; 2] {
        let malicious = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - malicious, malicious]
    }

    pub fn require_both_classes(&self) -> Result<()> {
        let [benign, malicious] = self.class_counts();
        if benign == 0 || malicious == 0 {
            return Err(Error::SingleClass { benign, malicious });
        }
        Ok(())
    }

    /// Projection onto `names`, in the order given.
    pub fn select_features<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let mut out_names = Vec::with_capacity(names.len());
        let mut out_cols = Vec::with_capacity(names.len());
        for name in names {
            let idx = self.feature_index(name.as_ref())?;
            out_names.push(self.feature_names[idx].clone());
            out_cols.push(self.columns[idx].clone());
        }
        Dataset::new(out_names, out_cols, self.labels.clone())
    }

    /// Rows at `rows`, in that order. Panics on an out-of-range index.
    pub fn take_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }

    /// Canonical delimited text: comma separated, canonical feature names,
    /// label column last. Floats use the shortest representation that parses
    /// back to the same bits.
    pub fn write_canonical_to<W: Write>(&self, writer: W) -> Result<()> {
        if self.feature_names.iter().any(|n| n == CANONICAL_LABEL) {
            return Err(Error::InvalidDataset(format!(
                "a feature is named `{CANONICAL_LABEL}`, which the canonical form reserves"
            )));
        }
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(CANONICAL_LABEL);
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(header.len());
        for row in 0..self.row_count() {
            record.clear();
            record.extend(self.columns.iter().map(|c| format!("{}", c[row])));
            record.push(self.labels[row].to_string());
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<canonical writer>", e))?;
        Ok(())
    }

    pub fn write_canonical(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_canonical_to(std::io::BufWriter::new(file))
    }

    /// Reads a file produced by [`Dataset::write_canonical`].
    pub fn load_canonical(path: impl AsRef<Path>) -> Result<Dataset> {
        Ok(load_table(path, &SchemaAdapter::canonical())?.dataset)
    }
}
