//! Link transforms for classification predictions.
//!
//! Partial dependence and interaction statistics for classifiers are
//! computed on a log-odds scale rather than on raw probabilities: the logit
//! of the positive class for binary responses, and for multi-class responses
//! the near-logit
//!
//! ```text
//! g_k(x) = log p_k(x) - (1/K) sum_l log p_l(x)
//! ```
//!
//! which is centered so the per-row values sum to zero. Probabilities are
//! clamped to `[1e-6, 1 - 1e-6]` before taking logs so hard 0/1 predictions
//! (common with tree ensembles) stay finite.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::models::{Predictions, Task};
use crate::Result;

pub const PROB_CLAMP: f64 = 1e-6;

fn clamped(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// Log-odds of the positive class, one value per row.
pub fn binary_logit(probs: &[Vec<f64>], positive: usize) -> Vec<f64> {
    probs
        .iter()
        .map(|row| {
            let p = clamped(row[positive]);
            (p / (1.0 - p)).ln()
        })
        .collect()
}

/// Near-logit values for every class, one row per input row; each output row
/// sums to zero by construction.
pub fn near_logit(probs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    probs
        .iter()
        .map(|row| {
            let logs: Vec<f64> = row.iter().map(|&p| clamped(p).ln()).collect();
            let mean = logs.iter().sum::<f64>() / logs.len() as f64;
            logs.iter().map(|l| l - mean).collect()
        })
        .collect()
}

/// How raw predictions become the scalar values all PD and interaction
/// computations run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkSpec {
    /// Regression: predictions pass through.
    Identity,
    /// Binary classification: logit of the class at this index.
    BinaryLogit { positive: usize },
    /// Multi-class: near-logit of the class at this index.
    NearLogit { class: usize },
}

impl LinkSpec {
    /// Default link for a task: identity for regression, logit of the last
    /// class for binary, near-logit of the last class otherwise. `class`
    /// overrides the designated class index.
    pub fn default_for(task: &Task, class: Option<usize>) -> Result<LinkSpec> {
        Ok(match task {
            Task::Regression => {
                if class.is_some() {
                    return Err(Error::arg("regression has no classes to designate"));
                }
                LinkSpec::Identity
            }
            Task::Classification { classes } => {
                let k = classes.len();
                let idx = class.unwrap_or(k - 1);
                if idx >= k {
                    return Err(Error::arg(format!("class index {idx} out of range (K={k})")));
                }
                if k == 2 {
                    LinkSpec::BinaryLogit { positive: idx }
                } else {
                    LinkSpec::NearLogit { class: idx }
                }
            }
        })
    }

    /// Scale label recorded on curves, surfaces, and matrices.
    pub fn scale_tag(&self) -> &'static str {
        match self {
            LinkSpec::Identity => "response",
            LinkSpec::BinaryLogit { .. } => "logit",
            LinkSpec::NearLogit { .. } => "near-logit",
        }
    }

    /// Collapses predictions to one link-scale value per row.
    pub fn apply(&self, preds: &Predictions) -> Result<Vec<f64>> {
        match (self, preds) {
            (LinkSpec::Identity, Predictions::Regression(v)) => Ok(v.clone()),
            (LinkSpec::BinaryLogit { positive }, Predictions::Classification(rows)) => {
                if rows.iter().any(|r| *positive >= r.len()) {
                    return Err(Error::arg("positive class index out of range"));
                }
                Ok(binary_logit(rows, *positive))
            }
            (LinkSpec::NearLogit { class }, Predictions::Classification(rows)) => {
                if rows.iter().any(|r| *class >= r.len()) {
                    return Err(Error::arg("class index out of range"));
                }
                Ok(near_logit(rows).into_iter().map(|r| r[*class]).collect())
            }
            (LinkSpec::Identity, Predictions::Classification(_)) => {
                Err(Error::model("classification predictions need a logit link"))
            }
            (_, Predictions::Regression(_)) => {
                Err(Error::model("regression predictions use the identity link"))
            }
        }
    }
}
