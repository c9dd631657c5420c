//! Importance and interaction measures, assembled into the VIVI matrix.
//!
//! Importance is either the model's embedded measure (forest impurity
//! decrease), whole-model permutation importance (mean metric change over
//! seeded column permutations), or a supplied vector. Interaction between
//! variables j and k compares joint and marginal partial dependence over a
//! seeded row sample:
//!
//! ```text
//! H_jk   = sqrt( (1/m) sum_a [ f_jk(a) - f_j(a) - f_k(a) ]^2 )      (rms residual)
//! H2_jk  =        sum_a [ f_jk(a) - f_j(a) - f_k(a) ]^2 / sum_a f_jk(a)^2
//! ```
//!
//! where all partial dependence functions are evaluated at the sampled
//! points and mean-centered over the sample. The un-normalized `H` is on the
//! prediction scale; the normalized `H2` divides by the joint variation and
//! blows up when the pair's surface is nearly flat, so flat denominators are
//! flagged and reported as zero.
//!
//! Variable pairs are independent work items and may run on a thread pool;
//! every per-pair summation has a fixed order, so the matrix is bitwise
//! identical for any worker count.

use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::models::{metrics, Predictions, Predictor, Task};
use crate::pdp::{link_values, LinkSpec};
use crate::rng;
use crate::tabular::{ColumnData, Table};
use crate::Result;

/// Performance metric for permutation importance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    /// Regression tasks.
    Rmse,
    /// Classification tasks.
    LogLoss,
}

fn evaluate_metric(metric: Metric, t: &Table, preds: &Predictions) -> Result<f64> {
    let response = t
        .response_column()
        .ok_or_else(|| Error::data("permutation importance needs a response column"))?;
    match metric {
        Metric::Rmse => {
            let y = response
                .as_numeric()
                .ok_or_else(|| Error::arg("RMSE requires a numeric response"))?;
            Ok(metrics::rmse(y, preds.as_regression()?))
        }
        Metric::LogLoss => {
            let (codes, _) = response
                .as_categorical()
                .ok_or_else(|| Error::arg("log loss requires a categorical response"))?;
            Ok(metrics::logloss(codes, preds.as_classification()?))
        }
    }
}

fn permuted_column(data: &ColumnData, perm: &[usize]) -> ColumnData {
    match data {
        ColumnData::Numeric(v) => ColumnData::Numeric(perm.iter().map(|&i| v[i]).collect()),
        ColumnData::Categorical { codes, levels } => ColumnData::Categorical {
            codes: perm.iter().map(|&i| codes[i]).collect(),
            levels: levels.clone(),
        },
    }
}

/// Whole-model permutation importance: for each feature, the mean over
/// `n_perm` seeded permutations of (metric after permuting that column)
/// minus the baseline metric. Larger is more important; a feature the model
/// ignores scores exactly zero.
pub fn permutation_importance(
    p: &dyn Predictor,
    t: &Table,
    metric: Metric,
    n_perm: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_perm == 0 {
        return Err(Error::arg("n_perm must be at least 1"));
    }
    permutation_importance_impl(p, t, metric, n_perm, &mut |feat_pos, round| {
        let mut r = rng::stream(seed, "perm", (feat_pos * n_perm + round) as u64);
        rng::permutation(&mut r, t.n())
    })
}

/// Implementation with an injectable permutation source, so tests can force
/// the identity permutation.
pub(crate) fn permutation_importance_impl(
    p: &dyn Predictor,
    t: &Table,
    metric: Metric,
    n_perm: usize,
    perms: &mut dyn FnMut(usize, usize) -> Vec<usize>,
) -> Result<Vec<f64>> {
    match (metric, p.task()) {
        (Metric::LogLoss, Task::Regression) => {
            return Err(Error::arg("log loss requires a classification model"))
        }
        (Metric::Rmse, Task::Classification { .. }) => {
            return Err(Error::arg("RMSE requires a regression model"))
        }
        _ => {}
    }
    let baseline = evaluate_metric(metric, t, &p.predict(t)?)?;
    let mut out = Vec::new();
    for (feat_pos, col) in t.feature_indices().into_iter().enumerate() {
        let mut total = 0.0;
        for round in 0..n_perm {
            let perm = perms(feat_pos, round);
            let shuffled = t.with_column_data(col, permuted_column(&t.columns()[col].data, &perm));
            let score = evaluate_metric(metric, t, &p.predict(&shuffled)?)?;
            total += score - baseline;
        }
        out.push(total / n_perm as f64);
    }
    Ok(out)
}

/// The seeded row sample used for interaction statistics: `m` distinct row
/// indices in ascending order (all rows when `m >= n`).
pub fn h_sample(n: usize, m: usize, seed: u64) -> Vec<usize> {
    let mut r = rng::stream(seed, "h-sample", 0);
    rng::sample_without_replacement(&mut r, n, m)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn pin_to_row(sub: &Table, col: usize, row: usize) -> ColumnData {
    match &sub.columns()[col].data {
        ColumnData::Numeric(v) => ColumnData::Numeric(vec![v[row]; sub.n()]),
        ColumnData::Categorical { codes, levels } => {
            ColumnData::Categorical { codes: vec![codes[row]; sub.n()], levels: levels.clone() }
        }
    }
}

/// `f_col` evaluated at each sampled point: `out[a]` is the mean link-scale
/// prediction with `col` pinned to its value in sample row `a`.
fn marginal_profile(
    p: &dyn Predictor,
    sub: &Table,
    col: usize,
    link: &LinkSpec,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(sub.n());
    for a in 0..sub.n() {
        let pinned = sub.with_column_data(col, pin_to_row(sub, col, a));
        out.push(mean(&link_values(p, &pinned, link)?));
    }
    Ok(out)
}

fn joint_profile(
    p: &dyn Predictor,
    sub: &Table,
    col_j: usize,
    col_k: usize,
    link: &LinkSpec,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(sub.n());
    for a in 0..sub.n() {
        let pinned = sub
            .with_column_data(col_j, pin_to_row(sub, col_j, a))
            .with_column_data(col_k, pin_to_row(sub, col_k, a));
        out.push(mean(&link_values(p, &pinned, link)?));
    }
    Ok(out)
}

fn centered(values: &[f64]) -> Vec<f64> {
    let m = mean(values);
    values.iter().map(|v| v - m).collect()
}

/// Both interaction statistics for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HStats {
    /// Root-mean-square joint-minus-marginal residual (prediction scale).
    pub h: f64,
    /// Normalized squared statistic; 0 when the denominator is flat.
    pub h2: f64,
    /// Denominator below 1e-12: the pair's surface is flat and `h2` is
    /// meaningless, reported as 0.
    pub flat: bool,
}

fn h_from_profiles(fjk: &[f64], fj: &[f64], fk: &[f64]) -> HStats {
    let fjk = centered(fjk);
    let fj = centered(fj);
    let fk = centered(fk);
    let m = fjk.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for a in 0..fjk.len() {
        let resid = fjk[a] - fj[a] - fk[a];
        num += resid * resid;
        den += fjk[a] * fjk[a];
    }
    let flat = den < 1e-12;
    HStats { h: (num / m).sqrt(), h2: if flat { 0.0 } else { num / den }, flat }
}

fn column_of(t: &Table, var: &str) -> Result<usize> {
    t.column(var).ok_or_else(|| Error::arg(format!("unknown variable '{var}'")))
}

/// Interaction statistics for one variable pair on a fresh seeded sample.
pub fn h_stats(
    p: &dyn Predictor,
    t: &Table,
    var_j: &str,
    var_k: &str,
    sample_rows: usize,
    seed: u64,
) -> Result<HStats> {
    let link = LinkSpec::default_for(p.task(), None)?;
    h_stats_linked(p, t, var_j, var_k, sample_rows, seed, &link)
}

pub fn h_stats_linked(
    p: &dyn Predictor,
    t: &Table,
    var_j: &str,
    var_k: &str,
    sample_rows: usize,
    seed: u64,
    link: &LinkSpec,
) -> Result<HStats> {
    if var_j == var_k {
        return Err(Error::arg("interaction needs two distinct variables"));
    }
    let sub = t.take_rows(&h_sample(t.n(), sample_rows, seed));
    let col_j = column_of(&sub, var_j)?;
    let col_k = column_of(&sub, var_k)?;
    let fj = marginal_profile(p, &sub, col_j, link)?;
    let fk = marginal_profile(p, &sub, col_k, link)?;
    let fjk = joint_profile(p, &sub, col_j, col_k, link)?;
    Ok(h_from_profiles(&fjk, &fj, &fk))
}

/// Square root of the mean squared joint-minus-marginal residual (Friedman's
/// statistic without its denominator), evaluated on a seeded sample.
pub fn h_unnormalized(
    p: &dyn Predictor,
    t: &Table,
    var_j: &str,
    var_k: &str,
    sample_rows: usize,
    seed: u64,
) -> Result<f64> {
    Ok(h_stats(p, t, var_j, var_k, sample_rows, seed)?.h)
}

/// Normalized squared statistic plus its flat-denominator flag.
pub fn h_normalized(
    p: &dyn Predictor,
    t: &Table,
    var_j: &str,
    var_k: &str,
    sample_rows: usize,
    seed: u64,
) -> Result<(f64, bool)> {
    let s = h_stats(p, t, var_j, var_k, sample_rows, seed)?;
    Ok((s.h2, s.flat))
}

/// Importance source for the matrix diagonal.
#[derive(Debug, Clone, PartialEq)]
pub enum ImportanceSpec {
    /// The model's embedded measure; errors when the model has none.
    Embedded,
    Permutation { metric: Metric, n_perm: usize },
    /// Externally supplied values, aligned with the table's feature columns;
    /// passed through unchanged.
    Supplied(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InteractionSpec {
    /// Root-mean-square residual (prediction scale).
    UnnormalizedH,
    /// Normalized squared statistic in (0, 1) for well-behaved pairs.
    NormalizedH2,
}

impl InteractionSpec {
    fn tag(self) -> &'static str {
        match self {
            InteractionSpec::UnnormalizedH => "unnormalized-h",
            InteractionSpec::NormalizedH2 => "normalized-h2",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ViviConfig {
    pub importance: ImportanceSpec,
    pub interaction: InteractionSpec,
    /// Row sample size for the interaction statistics.
    pub sample_rows: usize,
    pub seed: u64,
    /// Worker threads for pair computation; 0 means all available. The
    /// result does not depend on this.
    pub threads: usize,
    /// Designated class for classification links (default: last class).
    pub class: Option<usize>,
}

impl Default for ViviConfig {
    fn default() -> Self {
        ViviConfig {
            importance: ImportanceSpec::Permutation { metric: Metric::Rmse, n_perm: 4 },
            interaction: InteractionSpec::UnnormalizedH,
            sample_rows: 50,
            seed: 0,
            threads: 1,
            class: None,
        }
    }
}

/// Symmetric p x p matrix: importance on the diagonal, interaction off it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViviMatrix {
    pub names: Vec<String>,
    /// Row-major p x p values.
    pub values: Vec<f64>,
    /// Diagonal values before clipping negatives to zero.
    pub raw_importance: Vec<f64>,
    pub importance_tag: String,
    pub interaction_tag: String,
    /// Link scale of the interaction statistics.
    pub scale: String,
    pub sample_rows: usize,
    pub seed: u64,
    /// Pairs whose normalized denominator was flat (reported as 0).
    pub flat_pairs: Vec<(usize, usize)>,
    /// Normalized values above 1 (flagged, not clamped).
    pub h2_above_one: Vec<(usize, usize)>,
}

impl ViviMatrix {
    pub fn p(&self) -> usize {
        self.names.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p() + j]
    }

    pub fn importance(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    /// Maximum off-diagonal interaction involving variable `i` (0 for p=1).
    pub fn max_interaction(&self, i: usize) -> f64 {
        (0..self.p())
            .filter(|&j| j != i)
            .map(|j| self.get(i, j))
            .fold(0.0, f64::max)
    }

    /// Matrix with rows/columns rearranged by `order` (a permutation of
    /// variable indices).
    pub fn permuted(&self, order: &[usize]) -> Result<ViviMatrix> {
        let p = self.p();
        if order.len() != p {
            return Err(Error::arg("ordering length does not match the matrix"));
        }
        let mut seen = vec![false; p];
        for &i in order {
            if i >= p || seen[i] {
                return Err(Error::arg("ordering is not a permutation"));
            }
            seen[i] = true;
        }
        let remap_pairs = |pairs: &[(usize, usize)]| -> Vec<(usize, usize)> {
            let mut inv = vec![0usize; p];
            for (new_pos, &old) in order.iter().enumerate() {
                inv[old] = new_pos;
            }
            let mut out: Vec<(usize, usize)> = pairs
                .iter()
                .map(|&(i, j)| {
                    let (a, b) = (inv[i], inv[j]);
                    (a.min(b), a.max(b))
                })
                .collect();
            out.sort_unstable();
            out
        };
        let mut values = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                values[i * p + j] = self.get(order[i], order[j]);
            }
        }
        Ok(ViviMatrix {
            names: order.iter().map(|&i| self.names[i].clone()).collect(),
            values,
            raw_importance: order.iter().map(|&i| self.raw_importance[i]).collect(),
            importance_tag: self.importance_tag.clone(),
            interaction_tag: self.interaction_tag.clone(),
            scale: self.scale.clone(),
            sample_rows: self.sample_rows,
            seed: self.seed,
            flat_pairs: remap_pairs(&self.flat_pairs),
            h2_above_one: remap_pairs(&self.h2_above_one),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<ViviMatrix> {
        let m: ViviMatrix = serde_json::from_str(text)?;
        if m.values.len() != m.names.len() * m.names.len() {
            return Err(Error::data("matrix values are not p x p"));
        }
        Ok(m)
    }

    /// Square CSV with a header row and a leading name column.
    pub fn to_csv_string(&self) -> String {
        let p = self.p();
        let mut out = String::new();
        out.push_str("variable");
        for name in &self.names {
            out.push(',');
            out.push_str(&csv_field(name));
        }
        out.push('\n');
        for i in 0..p {
            out.push_str(&csv_field(&self.names[i]));
            for j in 0..p {
                out.push(',');
                out.push_str(&crate::tabular::format_float(self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Runs `n_tasks` closures on up to `threads` workers and returns results in
/// task order. Task outputs depend only on the task index, so the result is
/// identical for any worker count.
fn run_tasks<T: Send>(
    n_tasks: usize,
    threads: usize,
    task: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let workers = if threads == 0 {
        std::thread::available_parallelism().map(|v| v.get()).unwrap_or(1)
    } else {
        threads
    }
    .min(n_tasks.max(1));

    if workers <= 1 {
        return (0..n_tasks).map(&task).collect();
    }

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T>>>> =
        Mutex::new((0..n_tasks).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, AtomicOrdering::Relaxed);
                if i >= n_tasks {
                    break;
                }
                let result = task(i);
                if let Some(slot) = slots.lock().expect("task slots").get_mut(i) {
                    *slot = Some(result);
                }
            });
        }
    });
    slots
        .into_inner()
        .expect("task slots")
        .into_iter()
        .map(|s| s.expect("every task ran"))
        .collect()
}

/// Computes the full VIVI matrix for the table's feature columns.
pub fn vivi_matrix(p: &dyn Predictor, t: &Table, cfg: &ViviConfig) -> Result<ViviMatrix> {
    let names = t.feature_names();
    let n_vars = names.len();
    if n_vars == 0 {
        return Err(Error::data("table has no feature columns"));
    }
    let link = LinkSpec::default_for(p.task(), cfg.class)?;

    let (raw_importance, importance_tag, clip) = match &cfg.importance {
        ImportanceSpec::Embedded => {
            let model_values = p.embedded_importance().ok_or_else(|| {
                Error::arg("this model has no embedded importance; use permutation importance")
            })?;
            let model_names = p.feature_names();
            let mut aligned = Vec::with_capacity(n_vars);
            for name in &names {
                let pos = model_names.iter().position(|n| n == name).ok_or_else(|| {
                    Error::arg(format!("model has no feature '{name}' for embedded importance"))
                })?;
                aligned.push(model_values[pos]);
            }
            (aligned, "embedded-impurity".to_string(), true)
        }
        ImportanceSpec::Permutation { metric, n_perm } => {
            let values = permutation_importance(p, t, *metric, *n_perm, cfg.seed)?;
            let tag = match metric {
                Metric::Rmse => "permutation-rmse",
                Metric::LogLoss => "permutation-logloss",
            };
            (values, tag.to_string(), true)
        }
        ImportanceSpec::Supplied(values) => {
            if values.len() != n_vars {
                return Err(Error::arg(format!(
                    "supplied importance has {} values for {n_vars} variables",
                    values.len()
                )));
            }
            (values.clone(), "supplied".to_string(), false)
        }
    };

    let sub = t.take_rows(&h_sample(t.n(), cfg.sample_rows, cfg.seed));
    let cols: Vec<usize> = names.iter().map(|n| sub.column(n).unwrap()).collect();

    let marginals: Vec<Vec<f64>> =
        run_tasks(n_vars, cfg.threads, |v| marginal_profile(p, &sub, cols[v], &link))?;

    let pairs: Vec<(usize, usize)> = (0..n_vars)
        .flat_map(|i| ((i + 1)..n_vars).map(move |j| (i, j)))
        .collect();
    let stats: Vec<HStats> = run_tasks(pairs.len(), cfg.threads, |idx| {
        let (i, j) = pairs[idx];
        let fjk = joint_profile(p, &sub, cols[i], cols[j], &link)?;
        Ok(h_from_profiles(&fjk, &marginals[i], &marginals[j]))
    })?;

    let mut values = vec![0.0; n_vars * n_vars];
    for (v, raw) in raw_importance.iter().enumerate() {
        values[v * n_vars + v] = if clip { raw.max(0.0) } else { *raw };
    }
    let mut flat_pairs = Vec::new();
    let mut h2_above_one = Vec::new();
    for (idx, &(i, j)) in pairs.iter().enumerate() {
        let s = stats[idx];
        let value = match cfg.interaction {
            InteractionSpec::UnnormalizedH => s.h,
            InteractionSpec::NormalizedH2 => {
                if s.flat {
                    flat_pairs.push((i, j));
                }
                if s.h2 > 1.0 {
                    h2_above_one.push((i, j));
                }
                s.h2
            }
        };
        values[i * n_vars + j] = value;
        values[j * n_vars + i] = value;
    }

    Ok(ViviMatrix {
        names,
        values,
        raw_importance,
        importance_tag,
        interaction_tag: cfg.interaction.tag().to_string(),
        scale: link.scale_tag().to_string(),
        sample_rows: sub.n(),
        seed: cfg.seed,
        flat_pairs,
        h2_above_one,
    })
}
