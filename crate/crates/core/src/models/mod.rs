//! Predictors: built-in kNN and random forest, closure-backed predictors for
//! oracles, and the subprocess protocol for arbitrary external models.
//!
//! Everything downstream (partial dependence, importance, interaction) sees
//! only the [`Predictor`] trait, so the toolkit stays model-agnostic. Fitted
//! predictors are immutable and safe for concurrent `predict` calls; the
//! external predictor serializes access to its child process internally.

pub mod external;
pub mod forest;
pub mod func;
pub mod knn;
pub mod metrics;
pub mod store;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::tabular::{Column, ColumnData, Table};
use crate::Result;

/// Learning task. Classification carries the class labels in prediction
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Task {
    Regression,
    Classification { classes: Vec<String> },
}

impl Task {
    /// Derives the task from a table's response column: numeric response
    /// means regression, categorical means classification.
    pub fn from_table(t: &Table) -> Result<Task> {
        let response = t
            .response_column()
            .ok_or_else(|| Error::data("table has no response column designated"))?;
        Ok(match &response.data {
            ColumnData::Numeric(_) => Task::Regression,
            ColumnData::Categorical { levels, .. } => {
                Task::Classification { classes: levels.clone() }
            }
        })
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Task::Regression => 0,
            Task::Classification { classes } => classes.len(),
        }
    }

    pub fn is_classification(&self) -> bool {
        matches!(self, Task::Classification { .. })
    }
}

/// Model output: one real per row, or one probability row per input row.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    Regression(Vec<f64>),
    /// `rows x classes`, each row sums to 1.
    Classification(Vec<Vec<f64>>),
}

impl Predictions {
    pub fn len(&self) -> usize {
        match self {
            Predictions::Regression(v) => v.len(),
            Predictions::Classification(rows) => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_regression(&self) -> Result<&[f64]> {
        match self {
            Predictions::Regression(v) => Ok(v),
            Predictions::Classification(_) => {
                Err(Error::model("expected regression predictions"))
            }
        }
    }

    pub fn as_classification(&self) -> Result<&[Vec<f64>]> {
        match self {
            Predictions::Classification(rows) => Ok(rows),
            Predictions::Regression(_) => Err(Error::model("expected class probabilities")),
        }
    }
}

/// Uniform prediction interface over all models.
///
/// `predict` must be a pure function of the input rows: repeated calls with
/// the same rows return identical values, and the order of output rows
/// matches the order of input rows.
pub trait Predictor: Send + Sync {
    fn task(&self) -> &Task;

    /// Feature names in training-schema order.
    fn feature_names(&self) -> &[String];

    /// One prediction per row of `rows`. The table must contain every
    /// feature column (by name, with the training kind); extra columns such
    /// as the response are ignored.
    fn predict(&self, rows: &Table) -> Result<Predictions>;

    /// Model-native importance (impurity decrease for the forest); `None`
    /// when the model has no embedded measure.
    fn embedded_importance(&self) -> Option<Vec<f64>> {
        None
    }
}

/// One feature of a training schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureKind {
    Numeric,
    /// Levels as seen in training, in training order.
    Categorical { levels: Vec<String> },
}

impl Feature {
    /// Schema of all non-response columns of `t`, in table order.
    pub fn list_from_table(t: &Table) -> Vec<Feature> {
        t.feature_indices()
            .into_iter()
            .map(|i| {
                let c = &t.columns()[i];
                let kind = match &c.data {
                    ColumnData::Numeric(_) => FeatureKind::Numeric,
                    ColumnData::Categorical { levels, .. } => {
                        FeatureKind::Categorical { levels: levels.clone() }
                    }
                };
                Feature { name: c.name.clone(), kind }
            })
            .collect()
    }
}

/// A query table's column for one feature, with categorical codes translated
/// into training-level codes.
pub(crate) enum FeatView<'a> {
    Num(&'a [f64]),
    Cat(Vec<u32>),
}

impl FeatView<'_> {
    /// Numeric value, or the training level code as f64.
    pub(crate) fn value(&self, row: usize) -> f64 {
        match self {
            FeatView::Num(v) => v[row],
            FeatView::Cat(codes) => f64::from(codes[row]),
        }
    }
}

/// Checks that `t` carries every feature with the training kind and returns
/// per-feature views. Unseen categorical labels are an error.
pub(crate) fn resolve_features<'a>(
    features: &[Feature],
    t: &'a Table,
) -> Result<Vec<FeatView<'a>>> {
    let mut views = Vec::with_capacity(features.len());
    for feat in features {
        let idx = t
            .column(&feat.name)
            .ok_or_else(|| Error::model(format!("missing feature column '{}'", feat.name)))?;
        let col: &Column = &t.columns()[idx];
        let view = match (&feat.kind, &col.data) {
            (FeatureKind::Numeric, ColumnData::Numeric(v)) => FeatView::Num(v),
            (FeatureKind::Categorical { levels }, ColumnData::Categorical { codes, levels: got }) => {
                // Map the query table's level order onto training codes.
                let map: Vec<Option<u32>> = got
                    .iter()
                    .map(|label| levels.iter().position(|l| l == label).map(|p| p as u32))
                    .collect();
                let mut translated = Vec::with_capacity(codes.len());
                for &code in codes {
                    match map[code as usize] {
                        Some(tc) => translated.push(tc),
                        None => {
                            return Err(Error::model(format!(
                                "unseen level '{}' in column '{}'",
                                got[code as usize], feat.name
                            )))
                        }
                    }
                }
                FeatView::Cat(translated)
            }
            _ => {
                return Err(Error::model(format!(
                    "column '{}' does not match the training kind",
                    feat.name
                )))
            }
        };
        views.push(view);
    }
    Ok(views)
}

/// Response values encoded for fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) enum ResponseStore {
    Reg(Vec<f64>),
    Cls { codes: Vec<u32>, n_classes: usize },
}

pub(crate) fn encode_response(t: &Table) -> Result<(Task, ResponseStore)> {
    let task = Task::from_table(t)?;
    let col = t.response_column().unwrap();
    let store = match &col.data {
        ColumnData::Numeric(v) => ResponseStore::Reg(v.clone()),
        ColumnData::Categorical { codes, levels } => {
            ResponseStore::Cls { codes: codes.clone(), n_classes: levels.len() }
        }
    };
    Ok((task, store))
}
