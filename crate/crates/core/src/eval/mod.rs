//! Detection metrics, the cross-validated tuning objective and the model
//! comparison harness.

mod compare;
mod cv;
mod metrics;
pub mod report;
mod tuning;

pub use compare::{baseline_specs, compare_models, NamedModel, TableRow, BASELINE_LEARNERS, BOOSTED_TREE_DEPTH};
pub use cv::{cv_error, fit_predict, FittedModel, ModelConfig};
pub use metrics::{confusion, metrics, metrics_named, ConfusionMatrix, EvalReport};
pub use tuning::{tune, tune_random, TuneOutcome, TuneSettings, TuneTarget};
