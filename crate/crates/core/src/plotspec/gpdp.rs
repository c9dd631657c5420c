//! Generalized partial dependence pairs display.
//!
//! A matrix over the chosen variables: ICE curves with the superimposed
//! partial dependence curve on the diagonal, bivariate partial dependence
//! rasters (hull-masked) on the upper triangle, and raw scatter plots on the
//! lower triangle. Everything is colored by prediction on one shared
//! diverging scale whose limits come from the collection of bivariate
//! surfaces; predictions outside those limits clamp to the nearest end.
//! Pairs of one numeric and one categorical variable draw one partial
//! dependence curve per level, with the numeric variable on the x axis.

use crate::error::Error;
use crate::models::Predictor;
use crate::pdp::{
    ice_linked, ice_stratified, link_values, make_grid, pdp_2d_linked, Grid1D, IceBundle,
    LinkSpec, PdpSurface,
};
use crate::plotspec::draw::{frame, grid_axis_values, map_points, min_max, raster_shapes, AxisMap};
use crate::plotspec::palettes::{ColorScale, PaletteId, CATEGORY_COLORS};
use crate::plotspec::{Anchor, Legend, Panel, PanelRole, PlotKind, PlotSpec, Shape};
use crate::tabular::{ColumnData, Table};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpdpConfig {
    pub grid_size: usize,
    /// ICE curves kept per diagonal panel (regression: uniform sample).
    pub max_ice: usize,
    /// ICE curves kept per response class (classification).
    pub per_class: usize,
    pub seed: u64,
    /// Designated class for the link scale (classification only).
    pub class: Option<usize>,
}

impl Default for GpdpConfig {
    fn default() -> Self {
        GpdpConfig { grid_size: 20, max_ice: 30, per_class: 25, seed: 0, class: None }
    }
}

/// One upper-triangle surface; `x_var`/`y_var` are the panel axes (the
/// numeric variable of a mixed pair always sits on x).
#[derive(Debug, Clone, PartialEq)]
pub struct PairSurface {
    pub row: usize,
    pub col: usize,
    pub surface: PdpSurface,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpdpArtifacts {
    pub vars: Vec<String>,
    pub ice: Vec<IceBundle>,
    pub pairs: Vec<PairSurface>,
    /// Link-scale prediction for every table row.
    pub yhat: Vec<f64>,
    pub scale_tag: String,
    /// Value range over all bivariate surfaces: the diverging color limits.
    pub surface_range: (f64, f64),
}

/// Computes every panel's data: ICE bundles per variable, one oriented
/// surface per pair, and the shared prediction coloring.
pub fn compute_gpdp_artifacts(
    p: &dyn Predictor,
    t: &Table,
    vars: &[String],
    cfg: &GpdpConfig,
) -> Result<GpdpArtifacts> {
    if vars.len() < 2 || vars.len() > 8 {
        return Err(Error::arg(format!(
            "pairs display needs 2..=8 variables, got {}",
            vars.len()
        )));
    }
    for (i, v) in vars.iter().enumerate() {
        if t.column(v).is_none() {
            return Err(Error::arg(format!("unknown variable '{v}'")));
        }
        if vars[..i].contains(v) {
            return Err(Error::arg(format!("variable '{v}' listed twice")));
        }
    }
    let link = LinkSpec::default_for(p.task(), cfg.class)?;
    let grids: Vec<Grid1D> =
        vars.iter().map(|v| make_grid(t, v, cfg.grid_size)).collect::<Result<_>>()?;

    let stratify = p.task().is_classification()
        && t.response_column().is_some_and(|c| c.as_categorical().is_some());
    let ice: Vec<IceBundle> = grids
        .iter()
        .map(|g| {
            if stratify {
                ice_stratified(p, t, g, cfg.per_class, cfg.seed, &link)
            } else {
                ice_linked(p, t, g, cfg.max_ice, cfg.seed, &link)
            }
        })
        .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    for r in 0..vars.len() {
        for c in (r + 1)..vars.len() {
            // Numeric variable on x for mixed pairs; otherwise column on x.
            let (gx, gy) = if !grids[c].is_numeric() && grids[r].is_numeric() {
                (&grids[r], &grids[c])
            } else {
                (&grids[c], &grids[r])
            };
            let surface = pdp_2d_linked(p, t, gx, gy, &link)?;
            pairs.push(PairSurface { row: r, col: c, surface });
        }
    }
    let surface_range = min_max(
        pairs.iter().flat_map(|ps| ps.surface.values.iter().flatten().copied()),
    );
    let yhat = link_values(p, t, &link)?;
    Ok(GpdpArtifacts {
        vars: vars.to_vec(),
        ice,
        pairs,
        yhat,
        scale_tag: link.scale_tag().to_string(),
        surface_range,
    })
}

/// Observed axis values of a column: numeric values or level codes.
fn observed_values(t: &Table, var: &str) -> Vec<f64> {
    let col = &t.columns()[t.column(var).expect("validated")];
    match &col.data {
        ColumnData::Numeric(v) => v.clone(),
        ColumnData::Categorical { codes, .. } => codes.iter().map(|&c| f64::from(c)).collect(),
    }
}

const CELL: f64 = 110.0;
const GAP: f64 = 10.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 50.0;
const LEGEND_W: f64 = 110.0;

fn panel_origin(r: usize, c: usize) -> (f64, f64) {
    (
        MARGIN_LEFT + c as f64 * (CELL + GAP),
        MARGIN_TOP + r as f64 * (CELL + GAP),
    )
}

/// Assembles the pairs display from precomputed artifacts.
pub fn gpdp_spec(t: &Table, art: &GpdpArtifacts) -> Result<PlotSpec> {
    let k = art.vars.len();
    if art.ice.len() != k {
        return Err(Error::arg("artifacts do not match the variable list"));
    }
    let color = ColorScale::new(PaletteId::BlueYellowRed, art.surface_range.0, art.surface_range.1);

    let width = MARGIN_LEFT + k as f64 * (CELL + GAP) - GAP + LEGEND_W + 20.0;
    let height = MARGIN_TOP + k as f64 * (CELL + GAP) - GAP + 40.0;
    let mut spec = PlotSpec::new(PlotKind::Gpdp, width, height);

    let mut labels = Panel {
        role: PanelRole::Canvas,
        x: 0.0,
        y: 0.0,
        width,
        height,
        title: None,
        x_var: None,
        y_var: None,
        shapes: Vec::new(),
    };
    for (i, var) in art.vars.iter().enumerate() {
        let (x, y) = panel_origin(0, i);
        labels.shapes.push(Shape::Text {
            x: x + CELL / 2.0,
            y: MARGIN_TOP - 10.0,
            content: var.clone(),
            size: 11.0,
            anchor: Anchor::Middle,
            rotate: 0.0,
            fill: "#000000".to_string(),
        });
        let (_, y_row) = panel_origin(i, 0);
        labels.shapes.push(Shape::Text {
            x: MARGIN_LEFT - 10.0,
            y: y_row + CELL / 2.0,
            content: var.clone(),
            size: 11.0,
            anchor: Anchor::End,
            rotate: -90.0,
            fill: "#000000".to_string(),
        });
        let _ = y;
    }
    spec.panels.push(labels);

    // Diagonal: ICE curves colored by the row's prediction, mean curve black.
    for (r, bundle) in art.ice.iter().enumerate() {
        let (px, py) = panel_origin(r, r);
        let xs = grid_axis_values(&bundle.grid);
        let (x_lo, x_hi) = min_max(xs.iter().copied());
        let xmap = AxisMap::new(x_lo, x_hi, px + 4.0, px + CELL - 4.0);
        let (y_lo, y_hi) = min_max(
            bundle.curves.iter().flatten().copied().chain(bundle.mean.iter().copied()),
        );
        let ymap = AxisMap::new(y_lo, y_hi, py + CELL - 4.0, py + 4.0);
        let mut shapes = vec![frame(px, py, CELL, CELL)];
        for (curve, &row) in bundle.curves.iter().zip(&bundle.row_ids) {
            shapes.push(Shape::Polyline {
                points: map_points(&xs, curve, &xmap, &ymap),
                stroke: color.color_at(art.yhat[row]).to_string(),
                width: 0.8,
                opacity: 0.8,
            });
        }
        shapes.push(Shape::Polyline {
            points: map_points(&xs, &bundle.mean, &xmap, &ymap),
            stroke: "#000000".to_string(),
            width: 2.0,
            opacity: 1.0,
        });
        spec.panels.push(Panel {
            role: PanelRole::Diagonal,
            x: px,
            y: py,
            width: CELL,
            height: CELL,
            title: None,
            x_var: Some(art.vars[r].clone()),
            y_var: Some(art.vars[r].clone()),
            shapes,
        });
    }

    // Upper triangle: rasters, or one curve per level for mixed pairs.
    for ps in &art.pairs {
        let (px, py) = panel_origin(ps.row, ps.col);
        let s = &ps.surface;
        let mixed = s.grid_j.is_numeric() && !s.grid_k.is_numeric();
        let mut shapes = Vec::new();
        if mixed {
            shapes.push(frame(px, py, CELL, CELL));
            let xs = grid_axis_values(&s.grid_j);
            let (x_lo, x_hi) = min_max(xs.iter().copied());
            let xmap = AxisMap::new(x_lo, x_hi, px + 4.0, px + CELL - 4.0);
            let (y_lo, y_hi) = min_max(s.values.iter().flatten().copied());
            let ymap = AxisMap::new(y_lo, y_hi, py + CELL - 4.0, py + 4.0);
            for level in 0..s.grid_k.len() {
                let curve: Vec<f64> = s.values.iter().map(|row| row[level]).collect();
                shapes.push(Shape::Polyline {
                    points: map_points(&xs, &curve, &xmap, &ymap),
                    stroke: CATEGORY_COLORS[level % CATEGORY_COLORS.len()].to_string(),
                    width: 1.6,
                    opacity: 1.0,
                });
            }
        } else {
            shapes.extend(raster_shapes(px, py, CELL, CELL, s, &color));
            shapes.push(frame(px, py, CELL, CELL));
        }
        spec.panels.push(Panel {
            role: PanelRole::Upper,
            x: px,
            y: py,
            width: CELL,
            height: CELL,
            title: None,
            x_var: Some(s.grid_j.var.clone()),
            y_var: Some(s.grid_k.var.clone()),
            shapes,
        });
    }

    // Lower triangle: raw scatter colored by prediction.
    for r in 0..k {
        for c in 0..r {
            let (px, py) = panel_origin(r, c);
            let xv = observed_values(t, &art.vars[c]);
            let yv = observed_values(t, &art.vars[r]);
            let (x_lo, x_hi) = min_max(xv.iter().copied());
            let (y_lo, y_hi) = min_max(yv.iter().copied());
            let xmap = AxisMap::new(x_lo, x_hi, px + 4.0, px + CELL - 4.0);
            let ymap = AxisMap::new(y_lo, y_hi, py + CELL - 4.0, py + 4.0);
            let mut shapes = vec![frame(px, py, CELL, CELL)];
            for row in 0..t.n() {
                shapes.push(Shape::Circle {
                    cx: xmap.map(xv[row]),
                    cy: ymap.map(yv[row]),
                    r: 1.6,
                    fill: color.color_at(art.yhat[row]).to_string(),
                    stroke: None,
                    stroke_width: 0.0,
                    opacity: 0.75,
                });
            }
            spec.panels.push(Panel {
                role: PanelRole::Lower,
                x: px,
                y: py,
                width: CELL,
                height: CELL,
                title: None,
                x_var: Some(art.vars[c].clone()),
                y_var: Some(art.vars[r].clone()),
                shapes,
            });
        }
    }

    spec.legends.push(Legend {
        title: format!("prediction ({})", art.scale_tag),
        scale: color,
    });
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::func::FnPredictor;
    use crate::plotspec::render_svg;
    use crate::rng;
    use crate::tabular::Column;

    fn demo_table(n: usize) -> Table {
        let mut r = rng::seeded(3);
        let x1: Vec<f64> = (0..n).map(|_| rng::uniform01(&mut r)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng::uniform01(&mut r)).collect();
        let codes: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
        Table::new(vec![
            Column::numeric("x1", x1),
            Column::numeric("x2", x2),
            Column::categorical("c", codes, vec!["lo".into(), "hi".into()]),
            Column::numeric("y", y),
        ])
        .unwrap()
        .with_response("y")
        .unwrap()
    }

    #[test]
    fn two_variable_display_has_the_right_panel_counts() {
        let t = demo_table(40);
        let p = FnPredictor::regression(&["x1", "x2", "c"], |x| x[0] * x[1]);
        let art = compute_gpdp_artifacts(
            &p,
            &t,
            &["x1".to_string(), "x2".to_string()],
            &GpdpConfig { grid_size: 6, ..Default::default() },
        )
        .unwrap();
        let spec = gpdp_spec(&t, &art).unwrap();
        assert_eq!(spec.count_role(PanelRole::Diagonal), 2);
        assert_eq!(spec.count_role(PanelRole::Upper), 1);
        assert_eq!(spec.count_role(PanelRole::Lower), 1);
        render_svg(&spec).unwrap();
    }

    #[test]
    fn constant_predictor_paints_every_cell_with_the_midpoint_color() {
        let t = demo_table(25);
        let p = FnPredictor::regression(&["x1", "x2", "c"], |_| 2.0);
        let art = compute_gpdp_artifacts(
            &p,
            &t,
            &["x1".to_string(), "x2".to_string()],
            &GpdpConfig { grid_size: 4, ..Default::default() },
        )
        .unwrap();
        let spec = gpdp_spec(&t, &art).unwrap();
        let mid = crate::plotspec::palettes::BLUE_YELLOW_RED[5];
        let gray = crate::plotspec::palettes::MASK_GRAY;
        let mut in_hull_cells = 0;
        for panel in spec.panels.iter().filter(|p| p.role == PanelRole::Upper) {
            for shape in &panel.shapes {
                if let Shape::Rect { fill, .. } = shape {
                    if fill != "none" && fill != gray {
                        assert_eq!(fill, mid);
                        in_hull_cells += 1;
                    }
                }
            }
        }
        assert!(in_hull_cells > 0);
    }

    #[test]
    fn mixed_pair_draws_one_curve_per_level_with_numeric_on_x() {
        let t = demo_table(30);
        let p = FnPredictor::regression(&["x1", "x2", "c"], |x| x[0] + x[2]);
        let art = compute_gpdp_artifacts(
            &p,
            &t,
            &["c".to_string(), "x1".to_string()],
            &GpdpConfig { grid_size: 5, ..Default::default() },
        )
        .unwrap();
        // Pair (row=0 "c", col=1 "x1"): numeric x1 must be grid_j.
        assert_eq!(art.pairs[0].surface.grid_j.var, "x1");
        let spec = gpdp_spec(&t, &art).unwrap();
        let upper = spec.panels.iter().find(|p| p.role == PanelRole::Upper).unwrap();
        let curves = upper
            .shapes
            .iter()
            .filter(|s| matches!(s, Shape::Polyline { .. }))
            .count();
        assert_eq!(curves, 2, "one curve per level");
        assert_eq!(upper.x_var.as_deref(), Some("x1"));
    }

    #[test]
    fn seven_variable_display_has_the_full_panel_grid() {
        let names = ["v1", "v2", "v3", "v4", "v5", "v6", "v7"];
        let mut r = rng::seeded(9);
        let cols: Vec<Column> = names
            .iter()
            .map(|n| {
                Column::numeric(*n, (0..25).map(|_| rng::uniform01(&mut r)).collect())
            })
            .collect();
        let t = Table::new(cols).unwrap();
        let p = FnPredictor::regression(&names, |x| x.iter().sum::<f64>() + x[0] * x[1]);
        let vars: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let art = compute_gpdp_artifacts(
            &p,
            &t,
            &vars,
            &GpdpConfig { grid_size: 3, ..Default::default() },
        )
        .unwrap();
        let spec = gpdp_spec(&t, &art).unwrap();
        assert_eq!(spec.count_role(PanelRole::Diagonal), 7);
        assert_eq!(spec.count_role(PanelRole::Upper), 21);
        assert_eq!(spec.count_role(PanelRole::Lower), 21);
    }

    #[test]
    fn classification_display_stratifies_ice_and_uses_the_logit_scale() {
        let n = 60;
        let mut r = rng::seeded(12);
        let x1: Vec<f64> = (0..n).map(|_| rng::uniform01(&mut r)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng::uniform01(&mut r)).collect();
        // Minority class on every fifth row.
        let codes: Vec<u32> = (0..n).map(|i| u32::from(i % 5 == 0)).collect();
        let t = Table::new(vec![
            Column::numeric("x1", x1),
            Column::numeric("x2", x2),
            Column::categorical("y", codes.clone(), vec!["no".into(), "yes".into()]),
        ])
        .unwrap()
        .with_response("y")
        .unwrap();
        let p = FnPredictor::classification(&["x1", "x2"], &["no", "yes"], |x| {
            let q = (0.2 + 0.6 * x[0]).clamp(0.0, 1.0);
            vec![1.0 - q, q]
        });
        let art = compute_gpdp_artifacts(
            &p,
            &t,
            &["x1".to_string(), "x2".to_string()],
            &GpdpConfig { grid_size: 4, per_class: 5, ..Default::default() },
        )
        .unwrap();
        assert_eq!(art.scale_tag, "logit");
        for bundle in &art.ice {
            let minority = bundle.row_ids.iter().filter(|&&r| codes[r] == 1).count();
            assert_eq!(minority, 5, "five curves from each response class");
            assert_eq!(bundle.row_ids.len(), 10);
        }
        gpdp_spec(&t, &art).unwrap();
    }

    #[test]
    fn variable_validation() {
        let t = demo_table(10);
        let p = FnPredictor::regression(&["x1", "x2", "c"], |x| x[0]);
        let cfg = GpdpConfig::default();
        assert!(compute_gpdp_artifacts(&p, &t, &["x1".to_string()], &cfg).is_err());
        assert!(compute_gpdp_artifacts(&p, &t, &["x1".to_string(), "nope".to_string()], &cfg)
            .is_err());
        assert!(compute_gpdp_artifacts(
            &p,
            &t,
            &["x1".to_string(), "x1".to_string()],
            &cfg
        )
        .is_err());
    }
}
