use super::cv::{cv_error, ModelConfig};
use crate::bayesopt::spaces::{
    ensemble_params, ensemble_space, tree_params, tree_space, EnsembleBounds, TreeBounds,
};
use crate::bayesopt::{optimize, random_search, HyperPoint, OptimizationTrace, OptimizeConfig, SearchSpace};
use crate::data::DataTable;
use crate::error::{Error, Result};

/// What a tuning run searches over.
#[derive(Debug, Clone, PartialEq)]
pub enum TuneTarget {
    Ensemble(EnsembleBounds),
    /// Single tree: leaf size and depth bound.
    Tree(TreeBounds),
}

impl TuneTarget {
    pub fn space(&self) -> Result<SearchSpace> {
        match self {
            TuneTarget::Ensemble(b) => ensemble_space(b),
            TuneTarget::Tree(b) => tree_space(b),
        }
    }

    /// Learner configuration of a point; `seed` fixes the learners' own
    /// randomness so the objective is deterministic.
    pub fn config(&self, space: &SearchSpace, p: &HyperPoint, seed: u64) -> Result<ModelConfig> {
        Ok(match self {
            TuneTarget::Ensemble(_) => ModelConfig::Ensemble(ensemble_params(space, p, seed)?),
            TuneTarget::Tree(_) => ModelConfig::Tree(tree_params(space, p, seed)?),
        })
    }
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub space: SearchSpace,
    pub trace: OptimizationTrace,
    pub best_config: ModelConfig,
}

/// Settings shared by the BO and random-search drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneSettings {
    pub folds: usize,
    /// Seeds the folds and the learners.
    pub cv_seed: u64,
    pub optimizer: OptimizeConfig,
}

fn objective<'a>(
    target: &'a TuneTarget,
    space: &'a SearchSpace,
    train: &'a DataTable,
    settings: &'a TuneSettings,
) -> impl FnMut(&HyperPoint) -> Result<f64> + 'a {
    move |p| {
        let config = target.config(space, p, settings.cv_seed)?;
        cv_error(&config, train, settings.folds, settings.cv_seed)
    }
}

fn outcome(target: &TuneTarget, space: SearchSpace, trace: OptimizationTrace, seed: u64) -> Result<TuneOutcome> {
    let best = trace
        .best_trial()
        .ok_or(Error::Empty("optimization trace"))?
        .point
        .clone();
    let best_config = target.config(&space, &best, seed)?;
    Ok(TuneOutcome {
        space,
        trace,
        best_config,
    })
}

/// Minimizes cross-validated error with GP-EI Bayesian optimization.
pub fn tune(target: &TuneTarget, train: &DataTable, settings: &TuneSettings) -> Result<TuneOutcome> {
    let space = target.space()?;
    let trace = optimize(objective(target, &space, train, settings), &space, &settings.optimizer)?;
    outcome(target, space, trace, settings.cv_seed)
}

/// Same objective, uniform random proposals, same budget.
pub fn tune_random(target: &TuneTarget, train: &DataTable, settings: &TuneSettings) -> Result<TuneOutcome> {
    let space = target.space()?;
    let trace = random_search(
        objective(target, &space, train, settings),
        &space,
        settings.optimizer.budget,
        settings.optimizer.seed,
    );
    outcome(target, space, trace, settings.cv_seed)
}
