use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary confusion counts with Attack (1) as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_name: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub matrix: ConfusionMatrix,
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (row, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 0) => cm.tn += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            _ => {
                return Err(Error::InvalidLabel {
                    row,
                    value: format!("({t}, {p})"),
                })
            }
        }
    }
    Ok(cm)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Accuracy, precision, recall and F-score. Zero denominators give 0.
pub fn metrics(cm: &ConfusionMatrix) -> Result<EvalReport> {
    metrics_named(cm, "")
}

pub fn metrics_named(cm: &ConfusionMatrix, name: &str) -> Result<EvalReport> {
    if cm.total() == 0 {
        return Err(Error::Empty("confusion matrix"));
    }
    let accuracy = ratio(cm.tp + cm.tn, cm.total());
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f_score = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * (precision * recall) / (precision + recall)
    };
    Ok(EvalReport {
        model_name: name.to_string(),
        accuracy,
        precision,
        recall,
        f_score,
        matrix: *cm,
    })
}
