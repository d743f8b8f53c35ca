//! Tabular telemetry data: ingestion, preprocessing, partitioning and
//! exploratory projection.

mod ingest;
mod pca;
mod preprocess;
mod split;
mod synth;

pub use ingest::{load_csv, parse_key_values, IngestConfig, LabelMapping};
pub use pca::{pca_project, write_pca_csv, PcaResult};
pub use preprocess::{apply_preprocessor, fit_preprocessor, Preprocessor};
pub use split::{
    stratified_kfold, stratified_kfold_labels, stratified_split, stratified_split_indices, Fold,
};
pub use synth::{synthesize, synthesize_imbalanced, SynthConfig};

use crate::error::{Error, Result};

pub const NORMAL: u8 = 0;
pub const ATTACK: u8 = 1;

/// Dense row-major feature matrix with binary labels.
///
/// Missing cells hold `NaN` in `features` and `true` in `missing_mask`
/// until a [`Preprocessor`] imputes them.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    features: Vec<f64>,
    labels: Vec<u8>,
    column_names: Vec<String>,
    missing_mask: Vec<bool>,
    n_rows: usize,
    n_cols: usize,
}

impl DataTable {
    /// Builds a table from row-major features. Non-finite cells are treated
    /// as missing.
    pub fn new(
        features: Vec<f64>,
        labels: Vec<u8>,
        column_names: Vec<String>,
    ) -> Result<Self> {
        let missing_mask = features.iter().map(|v| !v.is_finite()).collect();
        Self::with_mask(features, labels, column_names, missing_mask)
    }

    pub fn with_mask(
        features: Vec<f64>,
        labels: Vec<u8>,
        column_names: Vec<String>,
        missing_mask: Vec<bool>,
    ) -> Result<Self> {
        let n_cols = column_names.len();
        let n_rows = labels.len();
        if n_cols == 0 {
            return Err(Error::NoUsableColumns);
        }
        if features.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                actual: features.len(),
            });
        }
        if missing_mask.len() != features.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                actual: missing_mask.len(),
            });
        }
        if let Some(row) = labels.iter().position(|&l| l > 1) {
            return Err(Error::InvalidLabel {
                row,
                value: labels[row].to_string(),
            });
        }
        Ok(Self {
            features,
            labels,
            column_names,
            missing_mask,
            n_rows,
            n_cols,
        })
    }

    /// Convenience constructor from nested rows with generated column names.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[u8]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                actual: rows.len(),
            });
        }
        let mut features = Vec::with_capacity(rows.len() * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    actual: row.len(),
                });
            }
            features.extend_from_slice(row);
        }
        let names = (0..n_cols).map(|j| format!("f{j}")).collect();
        Self::new(features, labels.to_vec(), names)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn missing_mask(&self) -> &[bool] {
        &self.missing_mask
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.features[row * self.n_cols + col]
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.missing_mask[row * self.n_cols + col]
    }

    pub fn missing_count(&self) -> usize {
        self.missing_mask.iter().filter(|&&m| m).count()
    }

    /// Copies column `j` into a fresh vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    /// Column-major copy of the feature matrix, one vector per column.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.n_cols).map(|j| self.column(j)).collect()
    }

    /// `[normal, attack]` row counts.
    pub fn class_counts(&self) -> [usize; 2] {
        let attack = self.labels.iter().filter(|&&l| l == ATTACK).count();
        [self.n_rows - attack, attack]
    }

    /// New table holding the given rows in the given order (repeats allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut features = Vec::with_capacity(rows.len() * self.n_cols);
        let mut mask = Vec::with_capacity(rows.len() * self.n_cols);
        let mut labels = Vec::with_capacity(rows.len());
        for &i in rows {
            features.extend_from_slice(self.row(i));
            mask.extend_from_slice(&self.missing_mask[i * self.n_cols..(i + 1) * self.n_cols]);
            labels.push(self.labels[i]);
        }
        Self {
            features,
            labels,
            column_names: self.column_names.clone(),
            missing_mask: mask,
            n_rows: rows.len(),
            n_cols: self.n_cols,
        }
    }

    pub(crate) fn check_width(&self, expected: usize) -> Result<()> {
        if self.n_cols != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: self.n_cols,
            });
        }
        Ok(())
    }
}
