//! Intrusion detection on host telemetry with tree ensembles whose
//! hyperparameters are tuned by Gaussian-process Bayesian optimization.
//!
//! Pipeline: [`data`] ingests and standardizes the telemetry, [`tree`] and
//! [`ensemble`] provide the learners, [`bayesopt`] searches the ensemble
//! configuration space against the cross-validated error from [`eval`],
//! which also produces the detection metrics report.
//!
//! Cost: scaling is linear in `F`; the surrogate solve is cubic in the number
//! of trials (tiny for budgets near 30); tree ensembles dominate at roughly
//! `I^2 F / T` with `T` worker threads, since bagged members and
//! cross-validation folds train in parallel.

pub mod bayesopt;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod rng;
pub mod tree;

pub use data::{DataTable, Preprocessor};
pub use error::{Error, Result};
