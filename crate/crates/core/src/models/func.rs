//! Closure-backed predictors.
//!
//! `FnPredictor` turns any function of a numeric feature row into a
//! [`Predictor`]. It is the natural way to plug analytically known response
//! surfaces (additive, multiplicative, ...) into the importance and
//! interaction machinery, which the test suites use as ground truth.

use crate::models::{FeatView, Feature, FeatureKind, Predictions, Predictor, Task};
use crate::tabular::{ColumnData, Table};
use crate::Result;

/// Resolves features leniently: any column kind is accepted, categorical
/// cells surface as their level code in the table's own level order.
fn loose_views<'a>(names: &[String], t: &'a Table) -> Result<Vec<FeatView<'a>>> {
    names
        .iter()
        .map(|name| {
            let idx = t
                .column(name)
                .ok_or_else(|| crate::error::Error::model(format!("missing column '{name}'")))?;
            Ok(match &t.columns()[idx].data {
                ColumnData::Numeric(v) => FeatView::Num(v),
                ColumnData::Categorical { codes, .. } => FeatView::Cat(codes.clone()),
            })
        })
        .collect()
}

type RegFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type ClsFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

enum Body {
    Reg(RegFn),
    Cls(ClsFn),
}

/// A predictor computed by a plain function of the feature row.
///
/// Features are numeric; categorical columns are presented to the closure as
/// their training level code.
pub struct FnPredictor {
    task: Task,
    features: Vec<Feature>,
    feature_names: Vec<String>,
    body: Body,
}

impl FnPredictor {
    pub fn regression(
        names: &[&str],
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let features = names
            .iter()
            .map(|n| Feature { name: (*n).to_string(), kind: FeatureKind::Numeric })
            .collect::<Vec<_>>();
        FnPredictor {
            task: Task::Regression,
            feature_names: names.iter().map(|n| (*n).to_string()).collect(),
            features,
            body: Body::Reg(Box::new(f)),
        }
    }

    /// `f` must return one probability per class, summing to 1.
    pub fn classification(
        names: &[&str],
        classes: &[&str],
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        let features = names
            .iter()
            .map(|n| Feature { name: (*n).to_string(), kind: FeatureKind::Numeric })
            .collect::<Vec<_>>();
        FnPredictor {
            task: Task::Classification { classes: classes.iter().map(|c| (*c).to_string()).collect() },
            feature_names: names.iter().map(|n| (*n).to_string()).collect(),
            features,
            body: Body::Cls(Box::new(f)),
        }
    }
}

impl Predictor for FnPredictor {
    fn task(&self) -> &Task {
        &self.task
    }

    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict(&self, rows: &Table) -> Result<Predictions> {
        let views = loose_views(&self.feature_names, rows)?;
        let m = rows.n();
        let mut point = vec![0.0; self.features.len()];
        match &self.body {
            Body::Reg(f) => {
                let mut out = Vec::with_capacity(m);
                for row in 0..m {
                    for (slot, view) in point.iter_mut().zip(&views) {
                        *slot = view.value(row);
                    }
                    out.push(f(&point));
                }
                Ok(Predictions::Regression(out))
            }
            Body::Cls(f) => {
                let mut out = Vec::with_capacity(m);
                for row in 0..m {
                    for (slot, view) in point.iter_mut().zip(&views) {
                        *slot = view.value(row);
                    }
                    out.push(f(&point));
                }
                Ok(Predictions::Classification(out))
            }
        }
    }
}

/// Decorator that pins one feature to a constant before delegating, making
/// the wrapped model provably ignore that column. Used to verify the
/// "ignored variable scores zero" contracts.
pub struct PinnedFeature<P> {
    inner: P,
    feature: String,
    value: f64,
}

impl<P: Predictor> PinnedFeature<P> {
    pub fn new(inner: P, feature: impl Into<String>, value: f64) -> Self {
        PinnedFeature { inner, feature: feature.into(), value }
    }
}

impl<P: Predictor> Predictor for PinnedFeature<P> {
    fn task(&self) -> &Task {
        self.inner.task()
    }

    fn feature_names(&self) -> &[String] {
        self.inner.feature_names()
    }

    fn predict(&self, rows: &Table) -> Result<Predictions> {
        let col = rows
            .column(&self.feature)
            .ok_or_else(|| crate::error::Error::model(format!("no column '{}'", self.feature)))?;
        let pinned = rows.with_column_data(
            col,
            crate::tabular::ColumnData::Numeric(vec![self.value; rows.n()]),
        );
        self.inner.predict(&pinned)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::Column;

    #[test]
    fn regression_closure_applies_per_row() {
        let p = FnPredictor::regression(&["a", "b"], |x| 2.0 * x[0] + x[1]);
        let t = Table::new(vec![
            Column::numeric("a", vec![1.0, 2.0]),
            Column::numeric("b", vec![10.0, 20.0]),
        ])
        .unwrap();
        let preds = p.predict(&t).unwrap();
        assert_eq!(preds.as_regression().unwrap(), &[12.0, 24.0]);
    }

    #[test]
    fn pinned_feature_ignores_the_column() {
        let p = FnPredictor::regression(&["a", "b"], |x| x[0] + x[1]);
        let pinned = PinnedFeature::new(p, "b", 0.0);
        let t1 = Table::new(vec![
            Column::numeric("a", vec![1.0, 2.0]),
            Column::numeric("b", vec![100.0, -3.0]),
        ])
        .unwrap();
        let preds = pinned.predict(&t1).unwrap();
        assert_eq!(preds.as_regression().unwrap(), &[1.0, 2.0]);
    }
}
