use rayon::prelude::*;

use super::cv::{fit_predict, ModelConfig};
use super::metrics::{confusion, metrics_named, EvalReport};
use crate::data::DataTable;
use crate::ensemble::{EnsembleKind, EnsembleParams};
use crate::error::{Error, Result};
use crate::tree::TreeParams;

/// Rows of the comparison table, in display order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TableRow {
    Dt,
    OptimizedDt,
    Bagging,
    Boosting,
    RusBoosting,
    OptimizedEnsemble,
}

impl TableRow {
    pub const ALL: [TableRow; 6] = [
        Self::Dt,
        Self::OptimizedDt,
        Self::Bagging,
        Self::Boosting,
        Self::RusBoosting,
        Self::OptimizedEnsemble,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Dt => "DT",
            Self::OptimizedDt => "Optimized DT",
            Self::Bagging => "Bagging Ensemble Trees",
            Self::Boosting => "Boosting Ensemble Trees",
            Self::RusBoosting => "RUSBoosting Ensemble Trees",
            Self::OptimizedEnsemble => "Optimized Ensemble Trees",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == name)
            .ok_or_else(|| Error::UnknownModel(name.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedModel {
    pub name: String,
    pub config: ModelConfig,
}

impl NamedModel {
    pub fn new(row: TableRow, config: ModelConfig) -> Self {
        Self {
            name: row.name().to_string(),
            config,
        }
    }
}

/// Depth bound of the boosted baseline trees.
pub const BOOSTED_TREE_DEPTH: usize = 4;
pub const BASELINE_LEARNERS: usize = 100;

/// The four untuned baselines: an unbounded tree, 100 bagged unbounded trees,
/// and 100 rounds each of AdaBoost and RUSBoost (ratio 1) over depth-4 trees
/// at learning rate 1.
pub fn baseline_specs(seed: u64) -> Vec<NamedModel> {
    let tree = TreeParams {
        seed,
        ..TreeParams::default()
    };
    let ensemble = |kind, depth| {
        let mut p = EnsembleParams::new(kind, BASELINE_LEARNERS);
        p.tree = TreeParams {
            max_depth: depth,
            ..tree.clone()
        };
        p.seed = seed;
        ModelConfig::Ensemble(p)
    };
    vec![
        NamedModel::new(TableRow::Dt, ModelConfig::Tree(tree.clone())),
        NamedModel::new(TableRow::Bagging, ensemble(EnsembleKind::Bagging, None)),
        NamedModel::new(
            TableRow::Boosting,
            ensemble(EnsembleKind::AdaBoost, Some(BOOSTED_TREE_DEPTH)),
        ),
        NamedModel::new(
            TableRow::RusBoosting,
            ensemble(EnsembleKind::RUSBoost, Some(BOOSTED_TREE_DEPTH)),
        ),
    ]
}

/// Trains every spec on `train`, scores it on `test`, and returns the
/// reports in table order (duplicates keep their input order).
pub fn compare_models(
    train: &DataTable,
    test: &DataTable,
    specs: &[NamedModel],
) -> Result<Vec<EvalReport>> {
    let rows = specs
        .iter()
        .map(|s| TableRow::from_name(&s.name))
        .collect::<Result<Vec<_>>>()?;
    let reports = specs
        .par_iter()
        .map(|spec| {
            let pred = fit_predict(&spec.config, train, test)?;
            let cm = confusion(test.labels(), &pred)?;
            metrics_named(&cm, &spec.name)
        })
        .collect::<Vec<Result<EvalReport>>>();
    let mut ordered: Vec<(TableRow, usize, Result<EvalReport>)> = rows
        .into_iter()
        .zip(reports)
        .enumerate()
        .map(|(i, (row, rep))| (row, i, rep))
        .collect();
    ordered.sort_by_key(|(row, i, _)| (*row, *i));
    ordered.into_iter().map(|(_, _, r)| r).collect()
}
