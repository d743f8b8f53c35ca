use statrs::function::erf::erfc;

use super::gp::{gp_predict, GpSurrogate};
use super::space::{encode_point, HyperPoint, SearchSpace};
use crate::error::Result;
use crate::rng::Rng;

pub const DEFAULT_XI: f64 = 0.01;
pub const DEFAULT_CANDIDATES: usize = 2000;
const DUPLICATE_RETRIES: usize = 10;

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Expected improvement below `f_best` (minimization) with margin `xi`.
pub fn expected_improvement(mean: f64, variance: f64, f_best: f64, xi: f64) -> f64 {
    let gap = f_best - mean - xi;
    let sigma = variance.max(0.0).sqrt();
    if sigma == 0.0 {
        return gap.max(0.0);
    }
    let z = gap / sigma;
    (gap * normal_cdf(z) + sigma * normal_pdf(z)).max(0.0)
}

/// Index and value of the encoded candidate with the largest EI; the
/// earliest wins ties.
pub fn select_by_ei(
    s: &GpSurrogate,
    encoded: &[Vec<f64>],
    f_best: f64,
    xi: f64,
) -> Result<Option<(usize, f64)>> {
    let mut best: Option<(usize, f64)> = None;
    for (i, x) in encoded.iter().enumerate() {
        let (m, v) = gp_predict(s, x)?;
        let ei = expected_improvement(m, v, f_best, xi);
        if best.is_none_or(|(_, b)| ei > b) {
            best = Some((i, ei));
        }
    }
    Ok(best)
}

/// Draws `n_candidates` uniform points and returns the one maximizing EI
/// against the best observed target. A draw matching an already evaluated
/// point is redrawn up to ten times, then accepted.
pub fn suggest_next(
    s: &GpSurrogate,
    space: &SearchSpace,
    evaluated: &[HyperPoint],
    rng: &mut Rng,
    n_candidates: usize,
    xi: f64,
) -> Result<HyperPoint> {
    let n_candidates = n_candidates.max(1);
    let mut candidates = Vec::with_capacity(n_candidates);
    for _ in 0..n_candidates {
        let mut p = space.sample_uniform(rng);
        for _ in 0..DUPLICATE_RETRIES {
            if !evaluated.contains(&p) {
                break;
            }
            p = space.sample_uniform(rng);
        }
        candidates.push(p);
    }
    let encoded = candidates
        .iter()
        .map(|p| encode_point(p, space))
        .collect::<Result<Vec<_>>>()?;
    let (index, _) = select_by_ei(s, &encoded, s.best_target(), xi)?.unwrap_or((0, 0.0));
    Ok(candidates.swap_remove(index))
}
