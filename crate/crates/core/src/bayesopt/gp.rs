//! Gaussian-process regression with a Matérn-5/2 ARD kernel.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Smallest noise variance placed on the diagonal.
pub const NOISE_FLOOR: f64 = 1e-10;
/// Largest extra diagonal jitter tried before giving up.
pub const MAX_JITTER: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Signal variance `a^2`.
    pub amplitude2: f64,
    pub length_scales: Vec<f64>,
}

impl KernelConfig {
    pub fn unit(dim: usize) -> Self {
        Self {
            amplitude2: 1.0,
            length_scales: vec![1.0; dim],
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && !v.is_nan();
        if !positive(self.amplitude2) || !self.length_scales.iter().all(|&l| positive(l)) {
            return Err(Error::InvalidParameter(
                "kernel parameters must be strictly positive".into(),
            ));
        }
        Ok(())
    }

    /// `a^2 (1 + sqrt5 r + 5 r^2 / 3) exp(-sqrt5 r)` with `r` the
    /// length-scaled Euclidean distance.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a
            .iter()
            .zip(b)
            .zip(&self.length_scales)
            .map(|((x, y), l)| ((x - y) / l).powi(2))
            .sum();
        let s5r = (5.0 * r2).sqrt();
        self.amplitude2 * (1.0 + s5r + 5.0 * r2 / 3.0) * (-s5r).exp()
    }
}

/// Lower Cholesky factor of a symmetric matrix stored row-major, or `None`
/// when it is not positive definite.
fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s.is_nan() || s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn forward_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l[i * n + k] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    x
}

fn backward_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= l[k * n + i] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    x
}

/// Conditioned GP: design points, centered targets and the factor of
/// `K + noise I`.
#[derive(Debug, Clone)]
pub struct GpSurrogate {
    design: Vec<Vec<f64>>,
    targets: Vec<f64>,
    target_mean: f64,
    kernel: KernelConfig,
    /// Noise actually on the diagonal, including any jitter.
    noise_variance: f64,
    factor: Vec<f64>,
    /// `(K + noise I)^-1 (y - mean)`.
    weights: Vec<f64>,
}

impl GpSurrogate {
    pub fn n_points(&self) -> usize {
        self.targets.len()
    }

    pub fn dim(&self) -> usize {
        self.kernel.length_scales.len()
    }

    pub fn kernel(&self) -> &KernelConfig {
        &self.kernel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Raw (uncentered) targets.
    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn best_target(&self) -> f64 {
        self.targets.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `-1/2 y^T (K + s I)^-1 y - 1/2 log|K + s I| - n/2 log 2 pi` on the
    /// centered targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.n_points();
        let centered: f64 = self
            .targets
            .iter()
            .zip(&self.weights)
            .map(|(y, w)| (y - self.target_mean) * w)
            .sum();
        let log_det: f64 = (0..n).map(|i| self.factor[i * n + i].ln()).sum::<f64>() * 2.0;
        -0.5 * centered - 0.5 * log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
    }
}

/// Conditions a Matérn-5/2 GP on `(x, y)`.
///
/// Noise below [`NOISE_FLOOR`] is raised to it; if the factorization still
/// fails, diagonal jitter escalates tenfold up to [`MAX_JITTER`].
pub fn gp_fit(
    x: &[Vec<f64>],
    y: &[f64],
    kernel: &KernelConfig,
    noise_variance: f64,
) -> Result<GpSurrogate> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Empty("GP design points"));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    kernel.validate()?;
    let d = kernel.length_scales.len();
    if let Some(bad) = x.iter().find(|row| row.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: bad.len(),
        });
    }
    let target_mean = y.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = y.iter().map(|v| v - target_mean).collect();

    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let k = kernel.eval(&x[i], &x[j]);
            gram[i * n + j] = k;
            gram[j * n + i] = k;
        }
    }
    let base_noise = noise_variance.max(NOISE_FLOOR);
    let mut jitter = 0.0;
    loop {
        let noise = base_noise + jitter;
        let mut a = gram.clone();
        for i in 0..n {
            a[i * n + i] += noise;
        }
        if let Some(factor) = cholesky(&a, n) {
            let weights = backward_solve(&factor, n, &forward_solve(&factor, n, &centered));
            return Ok(GpSurrogate {
                design: x.to_vec(),
                targets: y.to_vec(),
                target_mean,
                kernel: kernel.clone(),
                noise_variance: noise,
                factor,
                weights,
            });
        }
        jitter = if jitter == 0.0 { NOISE_FLOOR } else { jitter * 10.0 };
        if jitter > MAX_JITTER * (1.0 + 1e-9) {
            return Err(Error::Factorization { jitter: MAX_JITTER });
        }
    }
}

/// Posterior mean and variance (clamped at 0) at `x`.
pub fn gp_predict(s: &GpSurrogate, x: &[f64]) -> Result<(f64, f64)> {
    if x.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            actual: x.len(),
        });
    }
    let n = s.n_points();
    let k_star: Vec<f64> = s.design.iter().map(|p| s.kernel.eval(p, x)).collect();
    let mean = s.target_mean + k_star.iter().zip(&s.weights).map(|(k, w)| k * w).sum::<f64>();
    let v = forward_solve(&s.factor, n, &k_star);
    let var = s.kernel.amplitude2 - v.iter().map(|t| t * t).sum::<f64>();
    Ok((mean, var.max(0.0)))
}

/// Log-spaced grid `10^(lo + k step)` for `k = 0..`, up to `hi`.
fn log_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as i32;
    (0..=n).map(|k| 10f64.powf(lo + f64::from(k) * step)).collect()
}

/// Amplitude grid searched by [`fit_kernel`]; includes 1.
pub fn amplitude_grid() -> Vec<f64> {
    log_grid(-6.0, 1.0, 0.5)
}

/// Length-scale grid searched by [`fit_kernel`]; includes 1.
pub fn length_scale_grid() -> Vec<f64> {
    log_grid(-1.5, 1.0, 0.25)
}

pub fn default_noise_grid() -> Vec<f64> {
    vec![1e-10, 1e-8, 1e-6, 1e-5, 1e-4, 1e-3]
}

fn lml(x: &[Vec<f64>], y: &[f64], kernel: &KernelConfig, noise: f64) -> f64 {
    gp_fit(x, y, kernel, noise).map_or(f64::NEG_INFINITY, |s| s.log_marginal_likelihood())
}

/// Coordinate state: indices into the amplitude grid, one length-scale grid
/// index per dimension, and the noise grid.
#[derive(Clone)]
struct GridState {
    amp: usize,
    ls: Vec<usize>,
    noise: usize,
}

/// Maximizes the log marginal likelihood over amplitude, per-dimension
/// length-scales and noise by coordinate search on log-spaced grids.
///
/// The unit configuration (amplitude 1, length-scales 1, first noise grid
/// entry) seeds the first start; three more starts draw random grid cells
/// from the seeded generator. Sweeps repeat until no coordinate improves.
pub fn fit_kernel(
    x: &[Vec<f64>],
    y: &[f64],
    noise_grid: &[f64],
    seed: u64,
) -> Result<(KernelConfig, f64)> {
    if x.len() < 2 {
        return Err(Error::InvalidParameter(
            "kernel fitting needs at least two points".into(),
        ));
    }
    if noise_grid.is_empty() {
        return Err(Error::Empty("noise grid"));
    }
    let d = x[0].len();
    let amps = amplitude_grid();
    let lss = length_scale_grid();
    let unit_amp = amps.iter().position(|&a| (a - 1.0).abs() < 1e-12).unwrap_or(0);
    let unit_ls = lss.iter().position(|&l| (l - 1.0).abs() < 1e-12).unwrap_or(0);

    let config = |s: &GridState| KernelConfig {
        amplitude2: amps[s.amp],
        length_scales: s.ls.iter().map(|&k| lss[k]).collect(),
    };
    let score = |s: &GridState| lml(x, y, &config(s), noise_grid[s.noise]);

    let mut rng = seeded(seed);
    let mut starts = vec![GridState {
        amp: unit_amp,
        ls: vec![unit_ls; d],
        noise: 0,
    }];
    for _ in 0..3 {
        starts.push(GridState {
            amp: rng.random_range(0..amps.len()),
            ls: (0..d).map(|_| rng.random_range(0..lss.len())).collect(),
            noise: rng.random_range(0..noise_grid.len()),
        });
    }

    let mut best_state = starts[0].clone();
    let mut best = score(&best_state);
    for start in starts {
        let mut state = start;
        let mut current = score(&state);
        for _sweep in 0..50 {
            let mut improved = false;
            // coordinate 0: amplitude, 1..=d: length-scales, d+1: noise
            for c in 0..d + 2 {
                let len = match c {
                    0 => amps.len(),
                    c if c <= d => lss.len(),
                    _ => noise_grid.len(),
                };
                for k in 0..len {
                    let mut trial = state.clone();
                    match c {
                        0 => trial.amp = k,
                        c if c <= d => trial.ls[c - 1] = k,
                        _ => trial.noise = k,
                    }
                    let v = score(&trial);
                    if v > current + 1e-12 {
                        current = v;
                        state = trial;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        if current > best + 1e-12 {
            best = current;
            best_state = state;
        }
    }
    if !best.is_finite() {
        return Err(Error::Factorization { jitter: MAX_JITTER });
    }
    Ok((config(&best_state), noise_grid[best_state.noise]))
}
