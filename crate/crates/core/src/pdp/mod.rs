//! Partial dependence: 1-D and 2-D curves, ICE bundles, grids, and
//! extrapolation masks.
//!
//! The partial dependence of a fit `g` on variables `S` is the training-set
//! average of `g` with the `S` coordinates pinned:
//!
//! ```text
//! f_S(x_S) = (1/n) sum_i g(x_S, x_Ci)
//! ```
//!
//! ICE curves are the per-row terms of that average, so the ICE mean curve
//! equals the PD curve exactly (same summation order). Classification models
//! are evaluated on the link scale (see [`link`]).
//!
//! Row averages always run left to right in table row order, so results are
//! bitwise deterministic no matter how callers schedule the evaluations.

pub mod hull;
pub mod link;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::models::Predictor;
use crate::rng;
use crate::tabular::{ColumnData, Table};
use crate::Result;
pub use link::LinkSpec;

/// Evaluation grid for one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub var: String,
    pub points: GridPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridPoints {
    /// Strictly ascending values within the observed range.
    Numeric(Vec<f64>),
    /// Level labels in stored order.
    Categorical(Vec<String>),
}

impl Grid1D {
    pub fn len(&self) -> usize {
        match &self.points {
            GridPoints::Numeric(v) => v.len(),
            GridPoints::Categorical(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn numeric_points(&self) -> Option<&[f64]> {
        match &self.points {
            GridPoints::Numeric(v) => Some(v),
            GridPoints::Categorical(_) => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.points, GridPoints::Numeric(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridStrategy {
    /// Equally spaced from min to max inclusive.
    Equal,
    /// Data quantiles (deduplicated, so the grid may come out smaller).
    Quantile,
}

/// Equally spaced grid over the observed range of `var` (all stored levels
/// for a categorical variable).
pub fn make_grid(t: &Table, var: &str, size: usize) -> Result<Grid1D> {
    make_grid_with(t, var, size, GridStrategy::Equal)
}

pub fn make_grid_with(t: &Table, var: &str, size: usize, strategy: GridStrategy) -> Result<Grid1D> {
    let idx = t.column(var).ok_or_else(|| Error::arg(format!("unknown variable '{var}'")))?;
    let col = &t.columns()[idx];
    match &col.data {
        ColumnData::Categorical { levels, .. } => {
            Ok(Grid1D { var: var.to_string(), points: GridPoints::Categorical(levels.clone()) })
        }
        ColumnData::Numeric(values) => {
            if size == 0 {
                return Err(Error::arg("grid size must be at least 1"));
            }
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let points = if min == max {
                vec![min]
            } else {
                match strategy {
                    GridStrategy::Equal => {
                        if size == 1 {
                            vec![min]
                        } else {
                            let step = (max - min) / (size - 1) as f64;
                            let mut pts: Vec<f64> =
                                (0..size).map(|i| min + step * i as f64).collect();
                            pts[size - 1] = max;
                            pts
                        }
                    }
                    GridStrategy::Quantile => {
                        let mut sorted = values.clone();
                        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                        let n = sorted.len();
                        let mut pts: Vec<f64> = (0..size)
                            .map(|i| {
                                let q = if size == 1 {
                                    0.5
                                } else {
                                    i as f64 / (size - 1) as f64
                                };
                                let pos = q * (n - 1) as f64;
                                let lo = pos.floor() as usize;
                                let hi = pos.ceil() as usize;
                                let frac = pos - lo as f64;
                                sorted[lo] + (sorted[hi] - sorted[lo]) * frac
                            })
                            .collect();
                        pts.dedup();
                        pts
                    }
                }
            };
            Ok(Grid1D { var: var.to_string(), points: GridPoints::Numeric(points) })
        }
    }
}

/// Column data for one pinned grid value, replicated to `n` rows.
fn pinned_column(t: &Table, col: usize, point_index: usize, grid: &Grid1D) -> Result<ColumnData> {
    let n = t.n();
    match (&grid.points, &t.columns()[col].data) {
        (GridPoints::Numeric(v), ColumnData::Numeric(_)) => {
            Ok(ColumnData::Numeric(vec![v[point_index]; n]))
        }
        (GridPoints::Categorical(grid_levels), ColumnData::Categorical { levels, .. }) => {
            let label = &grid_levels[point_index];
            let code = levels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| Error::arg(format!("level '{label}' not in column '{}'", grid.var)))?;
            Ok(ColumnData::Categorical { codes: vec![code as u32; n], levels: levels.clone() })
        }
        _ => Err(Error::arg(format!("grid kind does not match column '{}'", grid.var))),
    }
}

/// Link-scale prediction values for every row of `t`.
pub fn link_values(p: &dyn Predictor, t: &Table, link: &LinkSpec) -> Result<Vec<f64>> {
    link.apply(&p.predict(t)?)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Per-grid-point link values for every row: `out[g][row]`.
fn profile_matrix(
    p: &dyn Predictor,
    t: &Table,
    grid: &Grid1D,
    link: &LinkSpec,
) -> Result<Vec<Vec<f64>>> {
    let col = t
        .column(&grid.var)
        .ok_or_else(|| Error::arg(format!("unknown variable '{}'", grid.var)))?;
    let mut out = Vec::with_capacity(grid.len());
    for g in 0..grid.len() {
        let pinned = t.with_column_data(col, pinned_column(t, col, g, grid)?);
        out.push(link_values(p, &pinned, link)?);
    }
    Ok(out)
}

/// One-variable partial dependence curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdpCurve {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    /// "response", "logit", or "near-logit".
    pub scale: String,
}

/// Partial dependence on one variable with the default link for the task.
pub fn pdp_1d(p: &dyn Predictor, t: &Table, grid: &Grid1D) -> Result<PdpCurve> {
    pdp_1d_linked(p, t, grid, &LinkSpec::default_for(p.task(), None)?)
}

pub fn pdp_1d_linked(
    p: &dyn Predictor,
    t: &Table,
    grid: &Grid1D,
    link: &LinkSpec,
) -> Result<PdpCurve> {
    let matrix = profile_matrix(p, t, grid, link)?;
    Ok(PdpCurve {
        grid: grid.clone(),
        values: matrix.iter().map(|row| mean(row)).collect(),
        scale: link.scale_tag().to_string(),
    })
}

/// ICE curves plus the exact all-rows mean curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IceBundle {
    pub grid: Grid1D,
    /// One curve per sampled row, aligned with `row_ids`.
    pub curves: Vec<Vec<f64>>,
    pub row_ids: Vec<usize>,
    /// Mean over all n rows; identical to the [`pdp_1d`] values.
    pub mean: Vec<f64>,
    pub scale: String,
}

/// Evaluates ICE curves over `grid`, keeping `min(max_curves, n)` seeded
/// uniformly sampled curves.
pub fn ice(
    p: &dyn Predictor,
    t: &Table,
    grid: &Grid1D,
    max_curves: usize,
    seed: u64,
) -> Result<IceBundle> {
    let link = LinkSpec::default_for(p.task(), None)?;
    ice_linked(p, t, grid, max_curves, seed, &link)
}

pub fn ice_linked(
    p: &dyn Predictor,
    t: &Table,
    grid: &Grid1D,
    max_curves: usize,
    seed: u64,
    link: &LinkSpec,
) -> Result<IceBundle> {
    if max_curves == 0 {
        return Err(Error::arg("max_curves must be at least 1"));
    }
    let mut r = rng::stream(seed, "ice", 0);
    let row_ids = rng::sample_without_replacement(&mut r, t.n(), max_curves);
    ice_for_rows(p, t, grid, row_ids, link)
}

/// ICE with per-response-class sampling: up to `per_class` rows from every
/// class of the categorical response. Used by classification pairs plots so
/// minority classes stay visible.
pub fn ice_stratified(
    p: &dyn Predictor,
    t: &Table,
    grid: &Grid1D,
    per_class: usize,
    seed: u64,
    link: &LinkSpec,
) -> Result<IceBundle> {
    if per_class == 0 {
        return Err(Error::arg("per_class must be at least 1"));
    }
    let response = t
        .response_column()
        .ok_or_else(|| Error::data("stratified sampling needs a response column"))?;
    let (codes, levels) = response
        .as_categorical()
        .ok_or_else(|| Error::data("stratified sampling needs a categorical response"))?;
    let mut row_ids = Vec::new();
    for class in 0..levels.len() as u32 {
        let members: Vec<usize> =
            (0..t.n()).filter(|&i| codes[i] == class).collect();
        let mut r = rng::stream(seed, "ice-class", u64::from(class));
        let picked = rng::sample_without_replacement(&mut r, members.len(), per_class);
        row_ids.extend(picked.into_iter().map(|i| members[i]));
    }
    row_ids.sort_unstable();
    ice_for_rows(p, t, grid, row_ids, link)
}

fn ice_for_rows(
    p: &dyn Predictor,
    t: &Table,
    grid: &Grid1D,
    row_ids: Vec<usize>,
    link: &LinkSpec,
) -> Result<IceBundle> {
    let matrix = profile_matrix(p, t, grid, link)?;
    let mean_curve: Vec<f64> = matrix.iter().map(|row| mean(row)).collect();
    let curves: Vec<Vec<f64>> = row_ids
        .iter()
        .map(|&r| matrix.iter().map(|per_row| per_row[r]).collect())
        .collect();
    Ok(IceBundle {
        grid: grid.clone(),
        curves,
        row_ids,
        mean: mean_curve,
        scale: link.scale_tag().to_string(),
    })
}

/// Two-variable partial dependence surface with its extrapolation mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdpSurface {
    pub grid_j: Grid1D,
    pub grid_k: Grid1D,
    /// Row-major: `values[a][b]` pins `grid_j[a]`, `grid_k[b]`.
    pub values: Vec<Vec<f64>>,
    /// True where the cell lies inside the hull of observed (j, k) pairs.
    /// Cells keep their values either way; renderers hide masked-out ones.
    pub mask: Vec<Vec<bool>>,
    pub scale: String,
}

/// Partial dependence over the cross product of two grids.
pub fn pdp_2d(p: &dyn Predictor, t: &Table, grid_j: &Grid1D, grid_k: &Grid1D) -> Result<PdpSurface> {
    pdp_2d_linked(p, t, grid_j, grid_k, &LinkSpec::default_for(p.task(), None)?)
}

pub fn pdp_2d_linked(
    p: &dyn Predictor,
    t: &Table,
    grid_j: &Grid1D,
    grid_k: &Grid1D,
    link: &LinkSpec,
) -> Result<PdpSurface> {
    if grid_j.var == grid_k.var {
        return Err(Error::arg("a surface needs two distinct variables"));
    }
    let col_j = t
        .column(&grid_j.var)
        .ok_or_else(|| Error::arg(format!("unknown variable '{}'", grid_j.var)))?;
    let col_k = t
        .column(&grid_k.var)
        .ok_or_else(|| Error::arg(format!("unknown variable '{}'", grid_k.var)))?;
    let mut values = Vec::with_capacity(grid_j.len());
    for a in 0..grid_j.len() {
        let pinned_j = t.with_column_data(col_j, pinned_column(t, col_j, a, grid_j)?);
        let mut row = Vec::with_capacity(grid_k.len());
        for b in 0..grid_k.len() {
            let pinned =
                pinned_j.with_column_data(col_k, pinned_column(&pinned_j, col_k, b, grid_k)?);
            row.push(mean(&link_values(p, &pinned, link)?));
        }
        values.push(row);
    }
    let mask = hull_mask(t, &grid_j.var, &grid_k.var, grid_j, grid_k)?;
    Ok(PdpSurface {
        grid_j: grid_j.clone(),
        grid_k: grid_k.clone(),
        values,
        mask,
        scale: link.scale_tag().to_string(),
    })
}

/// Convex-hull mask for a pair of grids: `mask[a][b]` is true when the point
/// `(grid_j[a], grid_k[b])` lies inside or on the hull of the observed
/// `(var_j, var_k)` pairs. Pairs involving a categorical variable are fully
/// inside.
pub fn hull_mask(
    t: &Table,
    var_j: &str,
    var_k: &str,
    grid_j: &Grid1D,
    grid_k: &Grid1D,
) -> Result<Vec<Vec<bool>>> {
    let col_j = t.column(var_j).ok_or_else(|| Error::arg(format!("unknown variable '{var_j}'")))?;
    let col_k = t.column(var_k).ok_or_else(|| Error::arg(format!("unknown variable '{var_k}'")))?;
    match (
        t.columns()[col_j].as_numeric(),
        t.columns()[col_k].as_numeric(),
        grid_j.numeric_points(),
        grid_k.numeric_points(),
    ) {
        (Some(xj), Some(xk), Some(gj), Some(gk)) => {
            let observed: Vec<(f64, f64)> =
                xj.iter().zip(xk).map(|(&a, &b)| (a, b)).collect();
            Ok(hull::grid_mask(&observed, gj, gk))
        }
        _ => Ok(vec![vec![true; grid_k.len()]; grid_j.len()]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::func::{FnPredictor, PinnedFeature};
    use crate::tabular::Column;

    fn uniform_table(n: usize, p: usize, seed: u64) -> Table {
        let mut cols = Vec::new();
        for j in 0..p {
            let mut r = rng::stream(seed, "col", j as u64);
            cols.push(Column::numeric(
                format!("x{}", j + 1),
                (0..n).map(|_| rng::uniform01(&mut r)).collect(),
            ));
        }
        Table::new(cols).unwrap()
    }

    #[test]
    fn equal_grid_examples() {
        let t = Table::new(vec![Column::numeric("v", vec![0.0, 0.25, 1.0])]).unwrap();
        let g = make_grid(&t, "v", 3).unwrap();
        assert_eq!(g.numeric_points().unwrap(), &[0.0, 0.5, 1.0]);

        let constant = Table::new(vec![Column::numeric("v", vec![2.0, 2.0])]).unwrap();
        let g = make_grid(&constant, "v", 5).unwrap();
        assert_eq!(g.numeric_points().unwrap(), &[2.0]);

        let wide = Table::new(vec![Column::numeric("v", vec![2.0, 40.0])]).unwrap();
        let g = make_grid(&wide, "v", 20).unwrap();
        let pts = g.numeric_points().unwrap();
        assert_eq!(pts.len(), 20);
        assert!((pts[1] - pts[0] - 2.0).abs() < 1e-12);
        assert_eq!(pts[19], 40.0);

        assert!(make_grid(&t, "nope", 3).is_err());
        assert!(make_grid(&t, "v", 0).is_err());
    }

    #[test]
    fn categorical_grid_lists_levels_in_stored_order() {
        let t = Table::new(vec![Column::categorical(
            "c",
            vec![0, 1, 2, 1],
            vec!["x".into(), "y".into(), "z".into()],
        )])
        .unwrap();
        let g = make_grid(&t, "c", 99).unwrap();
        assert_eq!(
            g.points,
            GridPoints::Categorical(vec!["x".into(), "y".into(), "z".into()])
        );
    }

    #[test]
    fn quantile_grid_is_strictly_ascending() {
        let t = Table::new(vec![Column::numeric(
            "v",
            vec![0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 10.0],
        )])
        .unwrap();
        let g = make_grid_with(&t, "v", 5, GridStrategy::Quantile).unwrap();
        let pts = g.numeric_points().unwrap();
        assert!(pts.windows(2).all(|w| w[0] < w[1]), "{pts:?}");
        assert_eq!(*pts.last().unwrap(), 10.0);
    }

    #[test]
    fn constant_predictor_gives_a_flat_curve() {
        let t = uniform_table(30, 2, 1);
        let p = FnPredictor::regression(&["x1", "x2"], |_| 4.25);
        let g = make_grid(&t, "x1", 7).unwrap();
        let curve = pdp_1d(&p, &t, &g).unwrap();
        assert!(curve.values.iter().all(|&v| v == 4.25));
    }

    #[test]
    fn linear_predictor_curve_has_exact_slope() {
        let t = uniform_table(40, 2, 2);
        let p = FnPredictor::regression(&["x1", "x2"], |x| 3.0 * x[0]);
        let g = make_grid(&t, "x1", 5).unwrap();
        let curve = pdp_1d(&p, &t, &g).unwrap();
        let pts = g.numeric_points().unwrap();
        for w in 1..pts.len() {
            let slope = (curve.values[w] - curve.values[w - 1]) / (pts[w] - pts[w - 1]);
            assert!((slope - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ice_mean_equals_pdp_bitwise_and_respects_min_rule() {
        let t = uniform_table(10, 2, 3);
        let p = FnPredictor::regression(&["x1", "x2"], |x| (x[0] * 7.0).sin() + x[1]);
        let g = make_grid(&t, "x1", 6).unwrap();
        let bundle = ice(&p, &t, &g, 30, 5).unwrap();
        assert_eq!(bundle.curves.len(), 10);
        let curve = pdp_1d(&p, &t, &g).unwrap();
        for (a, b) in bundle.mean.iter().zip(&curve.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn additive_model_gives_parallel_ice_curves() {
        let t = uniform_table(25, 2, 4);
        let p = FnPredictor::regression(&["x1", "x2"], |x| (3.0 * x[0]).exp() + 5.0 * x[1]);
        let g = make_grid(&t, "x1", 5).unwrap();
        let bundle = ice(&p, &t, &g, 25, 6).unwrap();
        for c in 1..bundle.curves.len() {
            let offset = bundle.curves[c][0] - bundle.curves[0][0];
            for g_idx in 1..g.len() {
                let diff = bundle.curves[c][g_idx] - bundle.curves[0][g_idx];
                assert!((diff - offset).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn surface_of_additive_oracle_is_the_addition_table() {
        let t = uniform_table(20, 2, 7);
        let p = FnPredictor::regression(&["x1", "x2"], |x| x[0] + x[1]);
        let gj = make_grid(&t, "x1", 4).unwrap();
        let gk = make_grid(&t, "x2", 3).unwrap();
        let s = pdp_2d(&p, &t, &gj, &gk).unwrap();
        let pj = gj.numeric_points().unwrap();
        let pk = gk.numeric_points().unwrap();
        for (a, &vj) in pj.iter().enumerate() {
            for (b, &vk) in pk.iter().enumerate() {
                assert!((s.values[a][b] - (vj + vk)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn surface_of_product_oracle_is_the_outer_product() {
        let t = uniform_table(50, 2, 8);
        let p = FnPredictor::regression(&["x1", "x2"], |x| x[0] * x[1]);
        let gj = make_grid(&t, "x1", 5).unwrap();
        let gk = make_grid(&t, "x2", 5).unwrap();
        let s = pdp_2d(&p, &t, &gj, &gk).unwrap();
        for (a, &vj) in gj.numeric_points().unwrap().iter().enumerate() {
            for (b, &vk) in gk.numeric_points().unwrap().iter().enumerate() {
                assert!((s.values[a][b] - vj * vk).abs() < 1e-12);
            }
        }
        assert!(pdp_2d(&p, &t, &gj, &gj).is_err());
    }

    #[test]
    fn ignored_variable_gives_flat_curve_and_replicated_surface() {
        let t = uniform_table(30, 3, 9);
        let inner = FnPredictor::regression(&["x1", "x2", "x3"], |x| x[0] * x[0] + x[1] + x[2]);
        let p = PinnedFeature::new(inner, "x3", 0.25);
        let g3 = make_grid(&t, "x3", 5).unwrap();
        let curve = pdp_1d(&p, &t, &g3).unwrap();
        for v in &curve.values {
            assert_eq!(v.to_bits(), curve.values[0].to_bits());
        }
        let g2 = make_grid(&t, "x2", 4).unwrap();
        let surface = pdp_2d(&p, &t, &g3, &g2).unwrap();
        let marginal = pdp_1d(&p, &t, &g2).unwrap();
        for row in &surface.values {
            for (a, b) in row.iter().zip(&marginal.values) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn stratified_ice_samples_each_class() {
        let n = 40;
        let codes: Vec<u32> = (0..n).map(|i| u32::from(i % 4 == 0)).collect();
        let t = Table::new(vec![
            Column::numeric("x1", (0..n).map(|i| f64::from(i) / n as f64).collect()),
            Column::categorical("y", codes.clone(), vec!["no".into(), "yes".into()]),
        ])
        .unwrap()
        .with_response("y")
        .unwrap();
        let p = FnPredictor::classification(&["x1"], &["no", "yes"], |x| {
            vec![1.0 - x[0] * 0.5, x[0] * 0.5]
        });
        let g = make_grid(&t, "x1", 3).unwrap();
        let link = LinkSpec::default_for(p.task(), None).unwrap();
        let bundle = ice_stratified(&p, &t, &g, 5, 3, &link).unwrap();
        let minority = bundle.row_ids.iter().filter(|&&r| codes[r] == 1).count();
        let majority = bundle.row_ids.len() - minority;
        assert_eq!(minority, 5);
        assert_eq!(majority, 5);
        assert_eq!(bundle.scale, "logit");
    }
}
