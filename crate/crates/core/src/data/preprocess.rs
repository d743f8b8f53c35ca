use serde::{Deserialize, Serialize};

use super::DataTable;
use crate::error::{Error, Result};

/// Fitted mean-imputation and standard-scaling statistics.
///
/// `scale_stds` are population (1/N) deviations of the imputed training
/// columns. A zero entry marks a constant column, which scales to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub impute_means: Vec<f64>,
    pub scale_means: Vec<f64>,
    pub scale_stds: Vec<f64>,
}

impl Preprocessor {
    pub fn width(&self) -> usize {
        self.impute_means.len()
    }

    /// Indices of columns with zero training variance.
    pub fn constant_columns(&self) -> Vec<usize> {
        self.scale_stds
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    fn transform(&self, j: usize, value: f64, missing: bool) -> f64 {
        let x = if missing { self.impute_means[j] } else { value };
        let sd = self.scale_stds[j];
        let divisor = if sd == 0.0 { 1.0 } else { sd };
        (x - self.scale_means[j]) / divisor
    }
}

/// Fits imputation means over observed cells, then scaling statistics over
/// the imputed columns.
pub fn fit_preprocessor(train: &DataTable) -> Result<Preprocessor> {
    if train.is_empty() {
        return Err(Error::Empty("training table"));
    }
    let n = train.n_rows();
    let f = train.n_cols();
    let mut impute_means = Vec::with_capacity(f);
    let mut scale_means = Vec::with_capacity(f);
    let mut scale_stds = Vec::with_capacity(f);
    for j in 0..f {
        let (sum, observed) = (0..n)
            .filter(|&i| !train.is_missing(i, j))
            .fold((0.0, 0usize), |(s, c), i| (s + train.get(i, j), c + 1));
        if observed == 0 {
            return Err(Error::AllMissingColumn(train.column_names()[j].clone()));
        }
        let impute = sum / observed as f64;
        let imputed = |i: usize| {
            if train.is_missing(i, j) {
                impute
            } else {
                train.get(i, j)
            }
        };
        let mean = (0..n).map(imputed).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (imputed(i) - mean).powi(2)).sum::<f64>() / n as f64;
        impute_means.push(impute);
        scale_means.push(mean);
        scale_stds.push(var.sqrt());
    }
    Ok(Preprocessor {
        impute_means,
        scale_means,
        scale_stds,
    })
}

/// Imputes and standardizes `table` with previously fitted statistics.
pub fn apply_preprocessor(prep: &Preprocessor, table: &DataTable) -> Result<DataTable> {
    table.check_width(prep.width())?;
    let f = table.n_cols();
    let features = table
        .features()
        .iter()
        .zip(table.missing_mask())
        .enumerate()
        .map(|(k, (&v, &m))| prep.transform(k % f, v, m))
        .collect();
    DataTable::with_mask(
        features,
        table.labels().to_vec(),
        table.column_names().to_vec(),
        vec![false; table.n_rows() * f],
    )
}
