//! k-nearest-neighbour predictor.
//!
//! Numeric features are standardized to mean 0 / sd 1 using training
//! statistics; categorical features are one-hot encoded. Distances are
//! Euclidean over the encoded space. Neighbours tied with the k-th distance
//! are all included, and neighbour aggregation runs in ascending row order so
//! predictions are deterministic.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::models::{
    encode_response, resolve_features, Feature, FeatureKind, Predictions, Predictor,
    ResponseStore, Task,
};
use crate::tabular::Table;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Dim {
    /// Standardized numeric feature.
    Numeric { feature: usize, mean: f64, sd: f64 },
    /// One-hot indicator for one level of a categorical feature.
    Indicator { feature: usize, level: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Knn {
    task: Task,
    features: Vec<Feature>,
    feature_names: Vec<String>,
    k: usize,
    dims: Vec<Dim>,
    /// Row-major encoded training matrix, `n * dims.len()`.
    encoded: Vec<f64>,
    n: usize,
    response: ResponseStore,
    /// Zero-variance features excluded from the distance.
    pub warnings: Vec<String>,
}

/// Fits a kNN predictor with `k` neighbours.
pub fn knn_fit(train: &Table, k: usize) -> Result<Knn> {
    if k == 0 || k > train.n() {
        return Err(Error::arg(format!("k must be in [1, {}], got {k}", train.n())));
    }
    let (task, response) = encode_response(train)?;
    let features = Feature::list_from_table(train);
    let views = resolve_features(&features, train)?;

    let mut dims = Vec::new();
    let mut warnings = Vec::new();
    for (fi, feat) in features.iter().enumerate() {
        match (&feat.kind, &views[fi]) {
            (FeatureKind::Numeric, crate::models::FeatView::Num(v)) => {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
                let sd = var.sqrt();
                if sd == 0.0 {
                    warnings.push(format!(
                        "feature '{}' has zero variance and is excluded from the distance",
                        feat.name
                    ));
                } else {
                    dims.push(Dim::Numeric { feature: fi, mean, sd });
                }
            }
            (FeatureKind::Categorical { levels }, crate::models::FeatView::Cat(codes)) => {
                let first = codes.first().copied();
                if codes.iter().all(|&c| Some(c) == first) {
                    warnings.push(format!(
                        "feature '{}' has zero variance and is excluded from the distance",
                        feat.name
                    ));
                } else {
                    for level in 0..levels.len() as u32 {
                        dims.push(Dim::Indicator { feature: fi, level });
                    }
                }
            }
            _ => unreachable!("resolve_features checked kinds"),
        }
    }

    let n = train.n();
    let mut encoded = vec![0.0; n * dims.len()];
    encode_rows(&dims, &views, n, &mut encoded);

    Ok(Knn {
        task,
        feature_names: features.iter().map(|f| f.name.clone()).collect(),
        features,
        k,
        dims,
        encoded,
        n,
        response,
        warnings,
    })
}

fn encode_rows(dims: &[Dim], views: &[crate::models::FeatView<'_>], n: usize, out: &mut [f64]) {
    let d = dims.len();
    for row in 0..n {
        for (j, dim) in dims.iter().enumerate() {
            out[row * d + j] = match dim {
                Dim::Numeric { feature, mean, sd } => {
                    (views[*feature].value(row) - mean) / sd
                }
                Dim::Indicator { feature, level } => {
                    if views[*feature].value(row) as u32 == *level {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
        }
    }
}

impl Knn {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Row indices of the k nearest training rows (including all ties with
    /// the k-th distance), in ascending row order.
    fn neighbours(&self, query: &[f64]) -> Vec<usize> {
        let d = self.dims.len();
        let mut dist: Vec<(f64, usize)> = (0..self.n)
            .map(|row| {
                let mut acc = 0.0;
                for (enc, q) in self.encoded[row * d..(row + 1) * d].iter().zip(query) {
                    let diff = enc - q;
                    acc += diff * diff;
                }
                (acc, row)
            })
            .collect();
        dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let kth = dist[self.k - 1].0;
        let mut picked: Vec<usize> = dist
            .iter()
            .take_while(|(dd, _)| *dd <= kth)
            .map(|&(_, row)| row)
            .collect();
        picked.sort_unstable();
        picked
    }
}

impl Predictor for Knn {
    fn task(&self) -> &Task {
        &self.task
    }

    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict(&self, rows: &Table) -> Result<Predictions> {
        let views = resolve_features(&self.features, rows)?;
        let m = rows.n();
        let d = self.dims.len();
        let mut query = vec![0.0; m * d];
        encode_rows(&self.dims, &views, m, &mut query);

        match (&self.task, &self.response) {
            (Task::Regression, ResponseStore::Reg(y)) => {
                let mut out = Vec::with_capacity(m);
                for row in 0..m {
                    let nb = self.neighbours(&query[row * d..(row + 1) * d]);
                    let sum: f64 = nb.iter().map(|&i| y[i]).sum();
                    out.push(sum / nb.len() as f64);
                }
                Ok(Predictions::Regression(out))
            }
            (Task::Classification { classes }, ResponseStore::Cls { codes, .. }) => {
                let k_classes = classes.len();
                let mut out = Vec::with_capacity(m);
                for row in 0..m {
                    let nb = self.neighbours(&query[row * d..(row + 1) * d]);
                    let mut counts = vec![0usize; k_classes];
                    for &i in &nb {
                        counts[codes[i] as usize] += 1;
                    }
                    out.push(counts.iter().map(|&c| c as f64 / nb.len() as f64).collect());
                }
                Ok(Predictions::Classification(out))
            }
            _ => Err(Error::model("response store does not match task")),
        }
    }
}
