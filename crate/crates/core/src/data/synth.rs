use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::DataTable;
use crate::error::{Error, Result};
use crate::rng::{seeded, Rng};

/// Generator settings for the imbalanced stand-in dataset.
///
/// Class membership is an XOR of two thresholds on the first two features,
/// so no single axis-aligned cut separates the classes. Feature 2 carries a
/// weak mean shift, the rest are noise. `label_noise` is the chance a row is
/// drawn from the other class's region; class counts stay exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_normal: usize,
    pub n_attack: usize,
    pub n_features: usize,
    pub seed: u64,
    pub label_noise: f64,
}

impl SynthConfig {
    pub fn new(n_normal: usize, n_attack: usize, n_features: usize, seed: u64) -> Self {
        Self {
            n_normal,
            n_attack,
            n_features,
            seed,
            label_noise: 0.02,
        }
    }

    /// 1/10 of the reference class counts with 20 features.
    pub fn desk_scale(seed: u64) -> Self {
        Self::new(2487, 1110, 20, seed)
    }
}

const CUT: f64 = 0.25;

fn region(x0: f64, x1: Option<f64>) -> u8 {
    match x1 {
        Some(x1) => u8::from((x0 > CUT) != (x1 > CUT)),
        None => u8::from(x0.abs() > 0.6),
    }
}

fn draw_in_region(rng: &mut Rng, class: u8, two_d: bool) -> (f64, Option<f64>) {
    loop {
        let x0 = rng.random_range(-1.0..1.0);
        let x1 = two_d.then(|| rng.random_range(-1.0..1.0));
        if region(x0, x1) == class {
            return (x0, x1);
        }
    }
}

pub fn synthesize_imbalanced(
    n_normal: usize,
    n_attack: usize,
    n_features: usize,
    seed: u64,
) -> Result<DataTable> {
    synthesize(&SynthConfig::new(n_normal, n_attack, n_features, seed))
}

pub fn synthesize(cfg: &SynthConfig) -> Result<DataTable> {
    if cfg.n_normal == 0 || cfg.n_attack == 0 || cfg.n_features == 0 {
        return Err(Error::InvalidParameter(
            "class counts and feature count must be positive".into(),
        ));
    }
    if !(0.0..=0.5).contains(&cfg.label_noise) {
        return Err(Error::InvalidParameter(format!(
            "label_noise must lie in [0, 0.5], got {}",
            cfg.label_noise
        )));
    }
    let mut rng = seeded(cfg.seed);
    let mut labels = vec![0u8; cfg.n_normal];
    labels.extend(std::iter::repeat_n(1u8, cfg.n_attack));
    labels.shuffle(&mut rng);

    let f = cfg.n_features;
    let two_d = f >= 2;
    let mut features = Vec::with_capacity(labels.len() * f);
    for &label in &labels {
        let flipped = rng.random_bool(cfg.label_noise);
        let region_class = if flipped { 1 - label } else { label };
        let (x0, x1) = draw_in_region(&mut rng, region_class, two_d);
        let start = features.len();
        features.push(x0);
        if let Some(x1) = x1 {
            features.push(x1);
        }
        for j in features.len() - start..f {
            let z: f64 = StandardNormal.sample(&mut rng);
            let v = if j == 2 { z + 0.6 * f64::from(label) } else { z };
            features.push(v);
        }
        // Heterogeneous units, as in mixed CPU/memory/disk counters.
        for (j, v) in features[start..].iter_mut().enumerate() {
            *v = *v * 10f64.powi(j as i32 % 4 - 1) + j as f64;
        }
    }
    let names = (0..f).map(|j| format!("feature_{j}")).collect();
    DataTable::new(features, labels, names)
}
