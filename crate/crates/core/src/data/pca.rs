use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};

use super::DataTable;
use crate::error::{Error, Result};

/// Principal axes of a (scaled) table and the rows projected onto them.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// `k` unit vectors of length F, strongest first.
    pub components: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
    /// `I x k`, row-major.
    pub projected: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

/// Projects the table onto the top-`k` eigenvectors of its sample covariance.
///
/// Each component's sign is fixed so its largest-magnitude entry is positive.
pub fn pca_project(table: &DataTable, k: usize) -> Result<PcaResult> {
    let n = table.n_rows();
    let f = table.n_cols();
    if k == 0 || k > f {
        return Err(Error::InvalidParameter(format!(
            "k must lie in [1, {f}], got {k}"
        )));
    }
    if n < 2 {
        return Err(Error::Degenerate("need at least two rows"));
    }
    if table.missing_count() > 0 {
        return Err(Error::InvalidParameter(
            "table has missing cells; preprocess first".into(),
        ));
    }
    let means: Vec<f64> = (0..f)
        .map(|j| (0..n).map(|i| table.get(i, j)).sum::<f64>() / n as f64)
        .collect();
    let centered = DMatrix::from_fn(n, f, |i, j| table.get(i, j) - means[j]);
    let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);
    let total: f64 = cov.diagonal().iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::Degenerate("zero total variance"));
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..f).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut components = Vec::with_capacity(k);
    let mut ratios = Vec::with_capacity(k);
    for &c in order.iter().take(k) {
        let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
        let pivot = v
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        ratios.push((eig.eigenvalues[c] / total).max(0.0));
    }

    let projected = (0..n)
        .map(|i| {
            components
                .iter()
                .map(|v| (0..f).map(|j| centered[(i, j)] * v[j]).sum())
                .collect()
        })
        .collect();
    Ok(PcaResult {
        components,
        explained_variance_ratio: ratios,
        projected,
        labels: table.labels().to_vec(),
    })
}

/// Writes `pc1,pc2,label` rows for external plotting.
pub fn write_pca_csv<W: Write>(result: &PcaResult, out: W) -> Result<()> {
    if result.components.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two components for pc1,pc2 output".into(),
        ));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["pc1", "pc2", "label"])?;
    for (row, label) in result.projected.iter().zip(&result.labels) {
        w.write_record([row[0].to_string(), row[1].to_string(), label.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
