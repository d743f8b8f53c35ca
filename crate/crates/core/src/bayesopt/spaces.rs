//! The concrete search spaces tuned by the pipeline and their mapping onto
//! learner parameters.

use std::io::Write;

use super::optimizer::OptimizationTrace;
use super::space::{Dimension, Domain, HyperPoint, ParamValue, SearchSpace};
use crate::ensemble::{EnsembleKind, EnsembleParams};
use crate::error::{Error, Result};
use crate::tree::TreeParams;

pub const KIND: &str = "kind";
pub const N_LEARNERS: &str = "n_learners";
pub const MIN_LEAF_SIZE: &str = "min_leaf_size";
pub const LEARNING_RATE: &str = "learning_rate";
pub const MAX_DEPTH: &str = "max_depth";

pub const TRACE_HEADER: [&str; 8] = [
    "iteration",
    "kind",
    "n_learners",
    "min_leaf_size",
    "learning_rate",
    "objective",
    "best_so_far",
    "duration_s",
];

/// Ranges of the ensemble search space; all integer and rate axes are
/// log-scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleBounds {
    pub n_learners: (i64, i64),
    pub min_leaf_size: (i64, i64),
    pub learning_rate: (f64, f64),
}

impl Default for EnsembleBounds {
    fn default() -> Self {
        Self {
            n_learners: (10, 500),
            min_leaf_size: (1, 1000),
            learning_rate: (0.001, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeBounds {
    pub min_leaf_size: (i64, i64),
    pub max_depth: (i64, i64),
}

impl Default for TreeBounds {
    fn default() -> Self {
        Self {
            min_leaf_size: (1, 1000),
            max_depth: (1, 100),
        }
    }
}

/// Ensemble kind, member count, leaf size and boosting rate. Trees are grown
/// without a depth bound.
pub fn ensemble_space(bounds: &EnsembleBounds) -> Result<SearchSpace> {
    let kinds: Vec<&str> = EnsembleKind::ALL.iter().map(|k| k.name()).collect();
    SearchSpace::new(vec![
        Dimension::categorical(KIND, &kinds),
        Dimension::integer(N_LEARNERS, bounds.n_learners.0, bounds.n_learners.1, true),
        Dimension::integer(MIN_LEAF_SIZE, bounds.min_leaf_size.0, bounds.min_leaf_size.1, true),
        Dimension::continuous(LEARNING_RATE, bounds.learning_rate.0, bounds.learning_rate.1, true),
    ])
}

/// Single-tree space: leaf size and depth bound.
pub fn tree_space(bounds: &TreeBounds) -> Result<SearchSpace> {
    SearchSpace::new(vec![
        Dimension::integer(MIN_LEAF_SIZE, bounds.min_leaf_size.0, bounds.min_leaf_size.1, true),
        Dimension::integer(MAX_DEPTH, bounds.max_depth.0, bounds.max_depth.1, true),
    ])
}

fn value(space: &SearchSpace, p: &HyperPoint, name: &str) -> Option<ParamValue> {
    space.index_of(name).map(|i| p.0[i])
}

fn int(space: &SearchSpace, p: &HyperPoint, name: &str) -> Option<i64> {
    match value(space, p, name)? {
        ParamValue::Int(v) => Some(v),
        _ => None,
    }
}

fn real(space: &SearchSpace, p: &HyperPoint, name: &str) -> Option<f64> {
    match value(space, p, name)? {
        ParamValue::Real(v) => Some(v),
        ParamValue::Int(v) => Some(v as f64),
        ParamValue::Level(_) => None,
    }
}

fn kind_of(space: &SearchSpace, p: &HyperPoint) -> Result<Option<EnsembleKind>> {
    let Some(i) = space.index_of(KIND) else {
        return Ok(None);
    };
    match (&space.dimensions()[i].domain, p.0[i]) {
        (Domain::Categorical(levels), ParamValue::Level(l)) => levels[l].parse().map(Some),
        _ => Err(Error::OutOfDomain {
            dimension: KIND.into(),
            detail: format!("{:?}", p.0[i]),
        }),
    }
}

fn positive(v: Option<i64>, default: usize) -> usize {
    v.map_or(default, |x| x.max(1) as usize)
}

/// Learner parameters for a point of [`ensemble_space`].
pub fn ensemble_params(space: &SearchSpace, p: &HyperPoint, seed: u64) -> Result<EnsembleParams> {
    space.check(p)?;
    let kind = kind_of(space, p)?.ok_or_else(|| Error::OutOfDomain {
        dimension: KIND.into(),
        detail: "space has no ensemble kind dimension".into(),
    })?;
    let mut params = EnsembleParams::new(kind, positive(int(space, p, N_LEARNERS), 10));
    params.learning_rate = real(space, p, LEARNING_RATE).unwrap_or(1.0);
    params.tree = TreeParams {
        min_leaf_size: positive(int(space, p, MIN_LEAF_SIZE), 1),
        max_depth: int(space, p, MAX_DEPTH).map(|d| d.max(1) as usize),
        ..TreeParams::default()
    };
    params.seed = seed;
    params.tree.seed = seed;
    Ok(params)
}

/// Tree parameters for a point of [`tree_space`].
pub fn tree_params(space: &SearchSpace, p: &HyperPoint, seed: u64) -> Result<TreeParams> {
    space.check(p)?;
    Ok(TreeParams {
        min_leaf_size: positive(int(space, p, MIN_LEAF_SIZE), 1),
        max_depth: int(space, p, MAX_DEPTH).map(|d| d.max(1) as usize),
        seed,
        ..TreeParams::default()
    })
}

/// Trace columns other than the numeric tail, for one point.
fn describe(space: &SearchSpace, p: &HyperPoint) -> Result<[String; 4]> {
    let depth = int(space, p, MAX_DEPTH);
    let kind = match (kind_of(space, p)?, depth) {
        (Some(k), None) => k.name().to_string(),
        (Some(k), Some(d)) => format!("{}(max_depth={d})", k.name()),
        (None, Some(d)) => format!("DT(max_depth={d})"),
        (None, None) => "DT".to_string(),
    };
    let n_learners = int(space, p, N_LEARNERS).map_or_else(|| "1".to_string(), |v| v.to_string());
    let leaf = int(space, p, MIN_LEAF_SIZE).map_or_else(String::new, |v| v.to_string());
    let rate = real(space, p, LEARNING_RATE).map_or_else(String::new, |v| format!("{v:.6}"));
    Ok([kind, n_learners, leaf, rate])
}

/// Writes the trace as `iteration,kind,n_learners,min_leaf_size,
/// learning_rate,objective,best_so_far,duration_s`.
///
/// With `timing` off the duration column is left empty so that reruns are
/// byte-identical.
pub fn write_trace_csv<W: Write>(
    trace: &OptimizationTrace,
    space: &SearchSpace,
    out: W,
    timing: bool,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for (trial, best) in trace.trials.iter().zip(&trace.best_so_far) {
        let [kind, n, leaf, rate] = describe(space, &trial.point)?;
        let duration = if timing {
            format!("{:.3}", trial.duration.as_secs_f64())
        } else {
            String::new()
        };
        w.write_record([
            trial.iteration.to_string(),
            kind,
            n,
            leaf,
            rate,
            format!("{:.6}", trial.objective),
            format!("{best:.6}"),
            duration,
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesopt::{encode_point, optimize, OptimizeConfig};

    #[test]
    fn default_ensemble_space_shape() {
        let s = ensemble_space(&EnsembleBounds::default()).unwrap();
        assert_eq!(s.encoded_dim(), 6);
        let p = HyperPoint(vec![
            ParamValue::Level(2),
            ParamValue::Int(50),
            ParamValue::Int(5),
            ParamValue::Real(0.1),
        ]);
        let params = ensemble_params(&s, &p, 4).unwrap();
        assert_eq!(params.kind, EnsembleKind::RUSBoost);
        assert_eq!(params.n_learners, 50);
        assert_eq!(params.tree.min_leaf_size, 5);
        assert_eq!(params.tree.max_depth, None);
        assert_eq!(params.learning_rate, 0.1);
        encode_point(&p, &s).unwrap();
    }

    #[test]
    fn tree_space_maps_depth() {
        let s = tree_space(&TreeBounds::default()).unwrap();
        let p = HyperPoint(vec![ParamValue::Int(3), ParamValue::Int(12)]);
        let t = tree_params(&s, &p, 0).unwrap();
        assert_eq!((t.min_leaf_size, t.max_depth), (3, Some(12)));
        assert!(ensemble_params(&s, &p, 0).is_err());
    }

    #[test]
    fn trace_csv_schema() {
        let s = ensemble_space(&EnsembleBounds::default()).unwrap();
        let cfg = OptimizeConfig {
            budget: 3,
            n_init: 3,
            ..OptimizeConfig::default()
        };
        let trace = optimize(|_: &HyperPoint| Ok::<_, String>(0.25), &s, &cfg).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&trace, &s, &mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iteration,kind,n_learners,min_leaf_size,learning_rate,objective,best_so_far,duration_s"
        );
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 8);
        assert_eq!(first[0], "1");
        assert_eq!(first[5], "0.250000");
        assert_eq!(first[7], "");
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn dt_trace_rows_carry_depth() {
        let s = tree_space(&TreeBounds::default()).unwrap();
        let p = HyperPoint(vec![ParamValue::Int(3), ParamValue::Int(12)]);
        let [kind, n, leaf, rate] = describe(&s, &p).unwrap();
        assert_eq!(kind, "DT(max_depth=12)");
        assert_eq!((n.as_str(), leaf.as_str(), rate.as_str()), ("1", "3", ""));
    }
}
