use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{apply_preprocessor, fit_preprocessor, stratified_kfold, DataTable};
use crate::ensemble::{fit_ensemble, predict_ensemble, EnsembleModel, EnsembleParams};
use crate::error::Result;
use crate::tree::{fit_tree, TreeModel, TreeParams};

/// Anything the evaluation harness can train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelConfig {
    Tree(TreeParams),
    Ensemble(EnsembleParams),
    /// Predicts one class for every row.
    Constant(u8),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Tree(TreeModel),
    Ensemble(EnsembleModel),
    Constant(u8),
}

impl ModelConfig {
    pub fn fit(&self, table: &DataTable) -> Result<FittedModel> {
        Ok(match self {
            ModelConfig::Tree(p) => {
                FittedModel::Tree(fit_tree(table, &vec![1.0; table.n_rows()], p)?)
            }
            ModelConfig::Ensemble(p) => FittedModel::Ensemble(fit_ensemble(table, p)?),
            ModelConfig::Constant(c) => FittedModel::Constant(*c),
        })
    }
}

impl FittedModel {
    pub fn predict(&self, table: &DataTable) -> Result<Vec<u8>> {
        match self {
            FittedModel::Tree(m) => {
                table.check_width(m.n_features)?;
                Ok((0..table.n_rows()).map(|i| m.predict_row(table.row(i)).0).collect())
            }
            FittedModel::Ensemble(m) => predict_ensemble(m, table).map(|(l, _)| l),
            FittedModel::Constant(c) => Ok(vec![*c; table.n_rows()]),
        }
    }
}

/// Fits the preprocessor on `train`, transforms both sides, trains and
/// predicts `test`.
pub fn fit_predict(config: &ModelConfig, train: &DataTable, test: &DataTable) -> Result<Vec<u8>> {
    let prep = fit_preprocessor(train)?;
    let train = apply_preprocessor(&prep, train)?;
    let test = apply_preprocessor(&prep, test)?;
    config.fit(&train)?.predict(&test)
}

/// Mean validation misclassification rate over `k` stratified folds.
///
/// Each fold fits its own preprocessor on its training part. Folds run in
/// parallel; the mean is taken in fold order.
pub fn cv_error(config: &ModelConfig, table: &DataTable, k: usize, seed: u64) -> Result<f64> {
    let folds = stratified_kfold(table, k, seed)?;
    let errors = folds
        .par_iter()
        .map(|fold| {
            let train = table.select_rows(&fold.train);
            let val = table.select_rows(&fold.validation);
            let pred = fit_predict(config, &train, &val)?;
            let wrong = pred.iter().zip(val.labels()).filter(|(p, t)| p != t).count();
            Ok(wrong as f64 / val.n_rows() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errors.iter().sum::<f64>() / errors.len() as f64)
}
