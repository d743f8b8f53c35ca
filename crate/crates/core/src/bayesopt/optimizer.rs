use std::fmt::Display;
use std::time::{Duration, Instant};

use log::{debug, warn};

use super::acquisition::{suggest_next, DEFAULT_CANDIDATES, DEFAULT_XI};
use super::gp::{default_noise_grid, fit_kernel, gp_fit, KernelConfig};
use super::space::{encode_point, HyperPoint, SearchSpace};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};

/// Objective value recorded for a failed evaluation (the worst error rate).
pub const FAILURE_PENALTY: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeConfig {
    pub budget: usize,
    pub n_init: usize,
    pub xi: f64,
    pub seed: u64,
    pub n_candidates: usize,
    pub noise_grid: Vec<f64>,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            budget: 30,
            n_init: 5,
            xi: DEFAULT_XI,
            seed: 0,
            n_candidates: DEFAULT_CANDIDATES,
            noise_grid: default_noise_grid(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    /// 1-based.
    pub iteration: usize,
    pub point: HyperPoint,
    pub objective: f64,
    pub duration: Duration,
    /// Error text when the evaluation failed and was scored with the penalty.
    pub failure: Option<String>,
}

/// Every evaluated trial plus the running minimum after each one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OptimizationTrace {
    pub trials: Vec<Trial>,
    pub best_so_far: Vec<f64>,
}

impl OptimizationTrace {
    fn record<E: Display>(&mut self, point: HyperPoint, outcome: std::result::Result<f64, E>, duration: Duration) {
        let (objective, failure) = match outcome {
            Ok(v) if v.is_finite() => (v, None),
            Ok(v) => (FAILURE_PENALTY, Some(format!("non-finite objective {v}"))),
            Err(e) => (FAILURE_PENALTY, Some(e.to_string())),
        };
        if let Some(msg) = &failure {
            warn!("trial {} failed: {msg}", self.trials.len() + 1);
        }
        let best = self.best().map_or(objective, |b| b.min(objective));
        self.trials.push(Trial {
            iteration: self.trials.len() + 1,
            point,
            objective,
            duration,
            failure,
        });
        self.best_so_far.push(best);
    }

    pub fn best(&self) -> Option<f64> {
        self.best_so_far.last().copied()
    }

    pub fn best_trial(&self) -> Option<&Trial> {
        // first trial attaining the minimum
        let best = self.best()?;
        self.trials.iter().find(|t| t.objective == best)
    }

    /// 1-based iteration at which the final minimum was first reached.
    pub fn iterations_to_best(&self) -> Option<usize> {
        self.best_trial().map(|t| t.iteration)
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Sequential GP-EI minimization of `objective` over `space`.
///
/// The first `n_init` evaluations come from a scrambled Halton design. Each
/// later iteration refits the kernel hyperparameters, conditions the GP on
/// all trials so far and evaluates the EI-maximizing candidate.
pub fn optimize<E, F>(mut objective: F, space: &SearchSpace, cfg: &OptimizeConfig) -> Result<OptimizationTrace>
where
    E: Display,
    F: FnMut(&HyperPoint) -> std::result::Result<f64, E>,
{
    if cfg.n_init == 0 || cfg.budget < cfg.n_init {
        return Err(Error::InvalidParameter(format!(
            "need budget >= n_init >= 1, got budget {} and n_init {}",
            cfg.budget, cfg.n_init
        )));
    }
    let mut trace = OptimizationTrace::default();
    let mut init_rng = seeded(derive_seed(cfg.seed, 0));
    for point in space.quasi_random(cfg.n_init, &mut init_rng) {
        let (outcome, duration) = timed(|| objective(&point));
        trace.record(point, outcome, duration);
    }

    for iteration in cfg.n_init..cfg.budget {
        let x = trace
            .trials
            .iter()
            .map(|t| encode_point(&t.point, space))
            .collect::<Result<Vec<_>>>()?;
        let y: Vec<f64> = trace.trials.iter().map(|t| t.objective).collect();
        let iter_seed = derive_seed(cfg.seed, iteration as u64 + 1);
        let (kernel, noise) = if x.len() >= 2 {
            fit_kernel(&x, &y, &cfg.noise_grid, derive_seed(iter_seed, 0))?
        } else {
            (KernelConfig::unit(space.encoded_dim()), cfg.noise_grid[0])
        };
        debug!(
            "iteration {}: amplitude2 {:e}, noise {:e}",
            iteration + 1,
            kernel.amplitude2,
            noise
        );
        let surrogate = gp_fit(&x, &y, &kernel, noise)?;
        let evaluated: Vec<HyperPoint> = trace.trials.iter().map(|t| t.point.clone()).collect();
        let mut rng = seeded(derive_seed(iter_seed, 1));
        let point = suggest_next(&surrogate, space, &evaluated, &mut rng, cfg.n_candidates, cfg.xi)?;
        let (outcome, duration) = timed(|| objective(&point));
        trace.record(point, outcome, duration);
    }
    Ok(trace)
}

/// Baseline: `budget` independent uniform draws.
pub fn random_search<E, F>(mut objective: F, space: &SearchSpace, budget: usize, seed: u64) -> OptimizationTrace
where
    E: Display,
    F: FnMut(&HyperPoint) -> std::result::Result<f64, E>,
{
    let mut rng = seeded(seed);
    let mut trace = OptimizationTrace::default();
    for _ in 0..budget {
        let point = space.sample_uniform(&mut rng);
        let (outcome, duration) = timed(|| objective(&point));
        trace.record(point, outcome, duration);
    }
    trace
}
