//! Bagging, AdaBoost and RUSBoost over the CART learner.

use rand::seq::index::sample;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};
use crate::tree::{fit_tree_on_rows, TrainingView, TreeModel, TreeParams};

/// Tag written into serialized ensembles.
pub const FORMAT_TAG: &str = "bogp-ensemble/1";

/// Error floor below which a boosting round is treated as perfect.
const PERFECT_ROUND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnsembleKind {
    Bagging,
    AdaBoost,
    RUSBoost,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 3] = [Self::Bagging, Self::AdaBoost, Self::RUSBoost];

    pub fn name(self) -> &'static str {
        match self {
            Self::Bagging => "Bagging",
            Self::AdaBoost => "AdaBoost",
            Self::RUSBoost => "RUSBoost",
        }
    }

    pub fn is_boosting(self) -> bool {
        !matches!(self, Self::Bagging)
    }
}

impl std::fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown ensemble kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub kind: EnsembleKind,
    pub n_learners: usize,
    /// Shrinkage on each boosting weight. Ignored by bagging.
    pub learning_rate: f64,
    pub tree: TreeParams,
    /// Majority:minority size of each RUSBoost training subset.
    pub undersample_ratio: f64,
    /// Bagging draws bootstrap resamples; `false` trains every member on the
    /// full table.
    pub bootstrap: bool,
    pub seed: u64,
}

impl EnsembleParams {
    pub fn new(kind: EnsembleKind, n_learners: usize) -> Self {
        Self {
            kind,
            n_learners,
            learning_rate: 1.0,
            tree: TreeParams::default(),
            undersample_ratio: 1.0,
            bootstrap: true,
            seed: 0,
        }
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_learners == 0 {
            return Err(Error::InvalidParameter("n_learners must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "learning_rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if !(self.undersample_ratio > 0.0 && self.undersample_ratio.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "undersample_ratio must be positive, got {}",
                self.undersample_ratio
            )));
        }
        self.tree.validate(n_features)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub tree: TreeModel,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub kind: EnsembleKind,
    pub members: Vec<Member>,
    pub trained_rounds: usize,
}

/// Per-round record of a boosting run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoostingLog {
    pub rounds: Vec<RoundRecord>,
    /// Normalized instance weights after the last update.
    pub final_weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// Weighted training error on the full table.
    pub epsilon: f64,
    /// Member weight; 0 for a discarded round.
    pub alpha: f64,
    pub retained: bool,
    /// `[normal, attack]` rows the round's tree trained on.
    pub subset_counts: [usize; 2],
    /// Sum of instance weights after the update.
    pub weight_sum: f64,
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    model: T,
}

impl EnsembleModel {
    pub fn predict_row(&self, row: &[f64]) -> (u8, f64) {
        match self.kind {
            EnsembleKind::Bagging => {
                let mut votes = 0usize;
                let mut score = 0.0;
                for m in &self.members {
                    let (label, p) = m.tree.predict_row(row);
                    votes += usize::from(label);
                    score += p;
                }
                let n = self.members.len();
                (u8::from(2 * votes > n), score / n as f64)
            }
            EnsembleKind::AdaBoost | EnsembleKind::RUSBoost => {
                let margin = self.margin(row);
                (u8::from(margin > 0.0), 1.0 / (1.0 + (-margin).exp()))
            }
        }
    }

    /// `sum alpha_t h_t(x)` with `h_t` in {-1, +1}.
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.members
            .iter()
            .map(|m| m.weight * sign(m.tree.predict_row(row).0))
            .sum()
    }

    pub fn n_features(&self) -> usize {
        self.members.first().map_or(0, |m| m.tree.n_features)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&Envelope {
            format: FORMAT_TAG.to_string(),
            model: self,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Envelope<EnsembleModel> = serde_json::from_str(text)?;
        if env.format != FORMAT_TAG {
            return Err(Error::FormatTag(env.format));
        }
        Ok(env.model)
    }
}

fn sign(label: u8) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

fn check_fit_input(table: &DataTable, params: &EnsembleParams, kind: EnsembleKind) -> Result<()> {
    if params.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "expected {kind} parameters, got {}",
            params.kind
        )));
    }
    if table.is_empty() {
        return Err(Error::Empty("training table"));
    }
    params.validate(table.n_cols())
}

/// Trains `n_learners` trees in parallel, each on its own bootstrap sample.
///
/// Member `i` draws from a generator seeded by `(seed, i)`, so the result is
/// identical for any worker count.
pub fn fit_bagging(table: &DataTable, params: &EnsembleParams) -> Result<EnsembleModel> {
    check_fit_input(table, params, EnsembleKind::Bagging)?;
    let view = TrainingView::new(table);
    let n = table.n_rows();
    let weights = vec![1.0; n];
    let members = (0..params.n_learners)
        .into_par_iter()
        .map(|i| {
            let member_seed = derive_seed(params.seed, i as u64);
            let mut rng = seeded(member_seed);
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let tree_params = TreeParams {
                seed: derive_seed(member_seed, 1),
                ..params.tree.clone()
            };
            let tree = fit_tree_on_rows(&view, &rows, &weights, &tree_params)?;
            Ok(Member { tree, weight: 1.0 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleModel {
        kind: EnsembleKind::Bagging,
        trained_rounds: members.len(),
        members,
    })
}

/// Binary AdaBoost with labels mapped to +-1.
pub fn fit_adaboost(table: &DataTable, params: &EnsembleParams) -> Result<EnsembleModel> {
    fit_adaboost_logged(table, params).map(|(m, _)| m)
}

pub fn fit_adaboost_logged(
    table: &DataTable,
    params: &EnsembleParams,
) -> Result<(EnsembleModel, BoostingLog)> {
    check_fit_input(table, params, EnsembleKind::AdaBoost)?;
    boost(table, params, false)
}

/// AdaBoost whose rounds train on the minority class plus a random
/// undersample of the majority; errors and weight updates use the full table.
pub fn fit_rusboost(table: &DataTable, params: &EnsembleParams) -> Result<EnsembleModel> {
    fit_rusboost_logged(table, params).map(|(m, _)| m)
}

pub fn fit_rusboost_logged(
    table: &DataTable,
    params: &EnsembleParams,
) -> Result<(EnsembleModel, BoostingLog)> {
    check_fit_input(table, params, EnsembleKind::RUSBoost)?;
    boost(table, params, true)
}

/// Rows of one RUSBoost round: every minority row plus
/// `round_half_up(minority * ratio)` majority rows drawn without replacement
/// (capped at the majority size). Sorted ascending.
pub fn undersample_rows(labels: &[u8], ratio: f64, rng: &mut crate::rng::Rng) -> Result<Vec<usize>> {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l as usize].push(i);
    }
    // Equal counts treat Attack as the minority.
    let minority_class = usize::from(by_class[1].len() <= by_class[0].len());
    let (minority, majority) = (&by_class[minority_class], &by_class[1 - minority_class]);
    if minority.is_empty() {
        return Err(Error::TooFewInstances {
            class: minority_class as u8,
            count: 0,
            needed: 1,
        });
    }
    let target = ((minority.len() as f64 * ratio) + 0.5).floor() as usize;
    let target = target.min(majority.len());
    let mut rows = minority.clone();
    rows.extend(sample(rng, majority.len(), target).into_iter().map(|k| majority[k]));
    rows.sort_unstable();
    Ok(rows)
}

fn boost(
    table: &DataTable,
    params: &EnsembleParams,
    undersample: bool,
) -> Result<(EnsembleModel, BoostingLog)> {
    let counts = table.class_counts();
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::TooFewInstances {
            class: u8::from(counts[1] == 0),
            count: 0,
            needed: 1,
        });
    }
    let view = TrainingView::new(table);
    let labels = table.labels();
    let n = table.n_rows();
    let all_rows: Vec<usize> = (0..n).collect();
    let mut w = vec![1.0 / n as f64; n];
    let mut members = Vec::new();
    let mut log = BoostingLog::default();
    let alpha_cap = params.learning_rate * 0.5 * (1.0 / PERFECT_ROUND).ln();

    for t in 0..params.n_learners {
        let round_seed = derive_seed(params.seed, t as u64);
        let tree_params = TreeParams {
            seed: derive_seed(round_seed, 1),
            ..params.tree.clone()
        };
        let (tree, subset_counts) = if undersample {
            let mut rng = seeded(round_seed);
            let rows = undersample_rows(labels, params.undersample_ratio, &mut rng)?;
            let subset_total: f64 = rows.iter().map(|&r| w[r]).sum();
            let mut restricted = vec![0.0; n];
            for &r in &rows {
                restricted[r] = w[r] / subset_total;
            }
            let attack = rows.iter().filter(|&&r| labels[r] == 1).count();
            let tree = fit_tree_on_rows(&view, &rows, &restricted, &tree_params)?;
            (tree, [rows.len() - attack, attack])
        } else {
            (fit_tree_on_rows(&view, &all_rows, &w, &tree_params)?, counts)
        };

        let predictions: Vec<u8> = (0..n).map(|i| tree.predict_row(table.row(i)).0).collect();
        let epsilon: f64 = (0..n)
            .filter(|&i| predictions[i] != labels[i])
            .map(|i| w[i])
            .sum();

        if epsilon >= 0.5 {
            log.rounds.push(RoundRecord {
                epsilon,
                alpha: 0.0,
                retained: false,
                subset_counts,
                weight_sum: w.iter().sum(),
            });
            break;
        }
        let perfect = epsilon <= PERFECT_ROUND;
        let alpha = if perfect {
            alpha_cap
        } else {
            params.learning_rate * 0.5 * ((1.0 - epsilon) / epsilon).ln()
        };
        if !perfect {
            for i in 0..n {
                w[i] *= (-alpha * sign(labels[i]) * sign(predictions[i])).exp();
            }
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
        }
        log.rounds.push(RoundRecord {
            epsilon,
            alpha,
            retained: true,
            subset_counts,
            weight_sum: w.iter().sum(),
        });
        members.push(Member { tree, weight: alpha });
        if perfect {
            break;
        }
    }

    log.final_weights = w;
    if members.is_empty() {
        return Err(Error::Degenerate(
            "first boosting round had weighted error >= 0.5",
        ));
    }
    Ok((
        EnsembleModel {
            kind: params.kind,
            trained_rounds: members.len(),
            members,
        },
        log,
    ))
}

/// Dispatches on `params.kind`.
pub fn fit_ensemble(table: &DataTable, params: &EnsembleParams) -> Result<EnsembleModel> {
    match params.kind {
        EnsembleKind::Bagging => fit_bagging(table, params),
        EnsembleKind::AdaBoost => fit_adaboost(table, params),
        EnsembleKind::RUSBoost => fit_rusboost(table, params),
    }
}

/// Labels and attack scores for every row, in row order.
pub fn predict_ensemble(model: &EnsembleModel, table: &DataTable) -> Result<(Vec<u8>, Vec<f64>)> {
    if model.members.is_empty() {
        return Err(Error::Empty("ensemble members"));
    }
    table.check_width(model.n_features())?;
    let (labels, scores) = (0..table.n_rows())
        .into_par_iter()
        .map(|i| model.predict_row(table.row(i)))
        .unzip();
    Ok((labels, scores))
}
