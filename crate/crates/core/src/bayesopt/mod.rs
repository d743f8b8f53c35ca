//! Gaussian-process Bayesian optimization over mixed hyperparameter spaces.

mod acquisition;
mod gp;
mod optimizer;
mod space;
pub mod spaces;

pub use acquisition::{
    expected_improvement, select_by_ei, suggest_next, DEFAULT_CANDIDATES, DEFAULT_XI,
};
pub use gp::{
    amplitude_grid, default_noise_grid, fit_kernel, gp_fit, gp_predict, length_scale_grid,
    GpSurrogate, KernelConfig, MAX_JITTER, NOISE_FLOOR,
};
pub use optimizer::{
    optimize, random_search, OptimizationTrace, OptimizeConfig, Trial, FAILURE_PENALTY,
};
pub use space::{decode_point, encode_point, Dimension, Domain, HyperPoint, ParamValue, SearchSpace};
