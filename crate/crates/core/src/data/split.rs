use rand::seq::SliceRandom;

use super::DataTable;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};

/// Row indices of one cross-validation fold, both sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

fn class_indices(labels: &[u8]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        out[l as usize].push(i);
    }
    out
}

fn require_per_class(by_class: &[Vec<usize>; 2], needed: usize) -> Result<()> {
    for (class, idx) in by_class.iter().enumerate() {
        if idx.len() < needed {
            return Err(Error::TooFewInstances {
                class: class as u8,
                count: idx.len(),
                needed,
            });
        }
    }
    Ok(())
}

/// Number of rows of a class with `count` members routed to the test side.
pub(crate) fn test_share(count: usize, test_fraction: f64) -> usize {
    ((count as f64 * test_fraction) + 0.5).floor() as usize
}

/// Index form of [`stratified_split`]: `(train_rows, test_rows)`.
pub fn stratified_split_indices(
    labels: &[u8],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut by_class = class_indices(labels);
    require_per_class(&by_class, 2)?;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, idx) in by_class.iter_mut().enumerate() {
        let mut rng = seeded(derive_seed(seed, class as u64));
        idx.shuffle(&mut rng);
        let n_test = test_share(idx.len(), test_fraction);
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Class-stratified holdout split. Each class sends
/// `round_half_up(count * test_fraction)` rows to the test partition.
pub fn stratified_split(
    table: &DataTable,
    test_fraction: f64,
    seed: u64,
) -> Result<(DataTable, DataTable)> {
    let (train, test) = stratified_split_indices(table.labels(), test_fraction, seed)?;
    Ok((table.select_rows(&train), table.select_rows(&test)))
}

/// Stratified k-fold partition over the table's labels.
pub fn stratified_kfold(table: &DataTable, k: usize, seed: u64) -> Result<Vec<Fold>> {
    stratified_kfold_labels(table.labels(), k, seed)
}

pub fn stratified_kfold_labels(labels: &[u8], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be >= 2, got {k}")));
    }
    let mut by_class = class_indices(labels);
    require_per_class(&by_class, k)?;
    let mut assignment = vec![0usize; labels.len()];
    // Class 1 starts where class 0's remainder left off, keeping total fold
    // sizes within one row of each other as well.
    let mut offset = 0;
    for (class, idx) in by_class.iter_mut().enumerate() {
        let mut rng = seeded(derive_seed(seed, class as u64));
        idx.shuffle(&mut rng);
        for (pos, &row) in idx.iter().enumerate() {
            assignment[row] = (pos + offset) % k;
        }
        offset = (offset + idx.len()) % k;
    }
    Ok((0..k)
        .map(|f| {
            let (validation, train): (Vec<usize>, Vec<usize>) =
                (0..labels.len()).partition(|&i| assignment[i] == f);
            Fold { train, validation }
        })
        .collect())
}
