//! Zigzag partial dependence display.
//!
//! Panels follow an Eulerian trail through the thresholded interaction
//! graph, so consecutive panels share the variable that links their edges:
//! moving rightward the shared variable stays on the y axis, moving downward
//! it stays on the x axis. Every axis carries an alpha-blended rug of the
//! observed values, surfaces are hull-masked, and panels appear in trail
//! order (approximately by decreasing interaction).

use std::collections::BTreeMap;

use crate::error::Error;
use crate::models::Predictor;
use crate::netgraph::{eulerian, EulerSequence, ViviGraph};
use crate::pdp::{make_grid, pdp_2d_linked, Grid1D, GridPoints, LinkSpec, PdpSurface};
use crate::plotspec::draw::{frame, min_max, raster_shapes, AxisMap};
use crate::plotspec::palettes::{ColorScale, PaletteId};
use crate::plotspec::{
    Anchor, Legend, Orientation, Panel, PanelRole, PlotKind, PlotSpec, Shape,
};
use crate::tabular::{ColumnData, Table};
use crate::Result;

/// Placement and axis assignment of one zigzag panel.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanStep {
    pub x_var: String,
    pub y_var: String,
    pub revisited: bool,
    pub trail: usize,
    pub col: usize,
    pub row: usize,
}

/// Lays out the trails: a staircase moving right, down, right, down. With
/// `join` the trails continue one staircase (boundaries just stop sharing an
/// axis); without it every trail starts its own staircase below the last.
pub fn plan_zpdp(seq: &EulerSequence, join: bool) -> Vec<PlanStep> {
    let mut plan = Vec::with_capacity(seq.total_steps());
    let mut global = 0usize;
    let mut row_offset = 0usize;
    for (ti, trail) in seq.trails.iter().enumerate() {
        let mut local_max_row = 0usize;
        for (si, step) in trail.steps.iter().enumerate() {
            let idx = if join { global } else { si };
            let col = idx.div_ceil(2);
            let row_in_block = idx / 2;
            let row = row_in_block + if join { 0 } else { row_offset };
            local_max_row = local_max_row.max(row_in_block);
            let (x_node, y_node) =
                if idx % 2 == 0 { (step.from, step.to) } else { (step.to, step.from) };
            plan.push(PlanStep {
                x_var: seq.node_names[x_node].clone(),
                y_var: seq.node_names[y_node].clone(),
                revisited: step.revisited,
                trail: ti,
                col,
                row,
            });
            global += 1;
        }
        if !join {
            row_offset += local_max_row + 2;
        }
    }
    plan
}

/// Observed values per variable, for the axis rugs (level codes for
/// categorical variables).
pub fn rug_data(t: &Table, vars: &[String]) -> Result<BTreeMap<String, Vec<f64>>> {
    let mut out = BTreeMap::new();
    for var in vars {
        let idx =
            t.column(var).ok_or_else(|| Error::arg(format!("unknown variable '{var}'")))?;
        let values = match &t.columns()[idx].data {
            ColumnData::Numeric(v) => v.clone(),
            ColumnData::Categorical { codes, .. } => {
                codes.iter().map(|&c| f64::from(c)).collect()
            }
        };
        out.insert(var.clone(), values);
    }
    Ok(out)
}

const CELL: f64 = 120.0;
const GAP: f64 = 48.0;
const MARGIN: f64 = 60.0;

/// Maps data values onto the pixel positions of an index-spaced raster axis:
/// the first grid point sits at the first cell's center, the last at the
/// last cell's center.
fn raster_axis(grid: &Grid1D, px_lo: f64, px_hi: f64) -> AxisMap {
    let cw = (px_hi - px_lo) / grid.len() as f64;
    match &grid.points {
        GridPoints::Numeric(v) => {
            AxisMap::new(v[0], v[v.len() - 1], px_lo + cw / 2.0, px_hi - cw / 2.0)
        }
        GridPoints::Categorical(levels) => AxisMap::new(
            0.0,
            (levels.len() - 1) as f64,
            px_lo + cw / 2.0,
            px_hi - cw / 2.0,
        ),
    }
}

/// Assembles the display. `surfaces[i]` must be oriented like the plan's
/// step `i`: `grid_j` on x, `grid_k` on y.
pub fn zpdp_spec(
    seq: &EulerSequence,
    surfaces: &[PdpSurface],
    rugs: &BTreeMap<String, Vec<f64>>,
    join: bool,
) -> Result<PlotSpec> {
    let plan = plan_zpdp(seq, join);
    if plan.is_empty() {
        return Err(Error::arg("the trail has no steps to display"));
    }
    if surfaces.len() != plan.len() {
        return Err(Error::arg(format!(
            "expected one surface per step ({}), got {}",
            plan.len(),
            surfaces.len()
        )));
    }
    for (step, surface) in plan.iter().zip(surfaces) {
        if surface.grid_j.var != step.x_var || surface.grid_k.var != step.y_var {
            return Err(Error::arg(format!(
                "surface oriented ({}, {}) does not match step ({}, {})",
                surface.grid_j.var, surface.grid_k.var, step.x_var, step.y_var
            )));
        }
    }

    let color = {
        let (lo, hi) = min_max(surfaces.iter().flat_map(|s| s.values.iter().flatten().copied()));
        ColorScale::new(PaletteId::BlueYellowRed, lo, hi)
    };

    let max_col = plan.iter().map(|s| s.col).max().unwrap();
    let max_row = plan.iter().map(|s| s.row).max().unwrap();
    let width = MARGIN + (max_col + 1) as f64 * (CELL + GAP) + 110.0;
    let height = MARGIN + (max_row + 1) as f64 * (CELL + GAP) + 20.0;
    let mut spec = PlotSpec::new(PlotKind::Zpdp, width, height);

    for (step, surface) in plan.iter().zip(surfaces) {
        let px = MARGIN + step.col as f64 * (CELL + GAP);
        let py = MARGIN + step.row as f64 * (CELL + GAP);
        let mut shapes = raster_shapes(px, py, CELL, CELL, surface, &color);
        shapes.push(frame(px, py, CELL, CELL));

        let xmap = raster_axis(&surface.grid_j, px, px + CELL);
        if let Some(values) = rugs.get(&step.x_var) {
            shapes.push(Shape::Rug {
                orientation: Orientation::Horizontal,
                base: py + CELL + 2.0,
                positions: values.iter().map(|&v| xmap.map(v)).collect(),
                length: 6.0,
                color: "#000000".to_string(),
                opacity: 0.25,
            });
        }
        // The y raster runs bottom-up; map through the flipped pixel range.
        let ymap = raster_axis(&surface.grid_k, 0.0, CELL);
        if let Some(values) = rugs.get(&step.y_var) {
            shapes.push(Shape::Rug {
                orientation: Orientation::Vertical,
                base: px - 8.0,
                positions: values.iter().map(|&v| py + CELL - ymap.map(v)).collect(),
                length: 6.0,
                color: "#000000".to_string(),
                opacity: 0.25,
            });
        }
        shapes.push(Shape::Text {
            x: px + CELL / 2.0,
            y: py + CELL + 22.0,
            content: step.x_var.clone(),
            size: 10.0,
            anchor: Anchor::Middle,
            rotate: 0.0,
            fill: "#000000".to_string(),
        });
        shapes.push(Shape::Text {
            x: px - 14.0,
            y: py + CELL / 2.0,
            content: step.y_var.clone(),
            size: 10.0,
            anchor: Anchor::Middle,
            rotate: -90.0,
            fill: "#000000".to_string(),
        });

        spec.panels.push(Panel {
            role: PanelRole::Zig,
            x: px,
            y: py,
            width: CELL,
            height: CELL,
            title: step.revisited.then(|| "revisit".to_string()),
            x_var: Some(step.x_var.clone()),
            y_var: Some(step.y_var.clone()),
            shapes,
        });
    }

    spec.legends.push(Legend {
        title: format!("prediction ({})", surfaces[0].scale),
        scale: color,
    });
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZpdpConfig {
    pub grid_size: usize,
    pub join: bool,
    pub class: Option<usize>,
}

impl Default for ZpdpConfig {
    fn default() -> Self {
        ZpdpConfig { grid_size: 20, join: true, class: None }
    }
}

/// Full pipeline from a filtered graph: Eulerian trails, oriented surfaces
/// per step, rugs, display.
pub fn build_zpdp(
    p: &dyn Predictor,
    t: &Table,
    g: &ViviGraph,
    cfg: &ZpdpConfig,
) -> Result<(EulerSequence, PlotSpec)> {
    let seq = eulerian(g)?;
    let plan = plan_zpdp(&seq, cfg.join);
    let link = LinkSpec::default_for(p.task(), cfg.class)?;
    let mut grids: BTreeMap<String, Grid1D> = BTreeMap::new();
    for step in &plan {
        for var in [&step.x_var, &step.y_var] {
            if !grids.contains_key(var) {
                grids.insert(var.clone(), make_grid(t, var, cfg.grid_size)?);
            }
        }
    }
    let surfaces: Vec<PdpSurface> = plan
        .iter()
        .map(|step| pdp_2d_linked(p, t, &grids[&step.x_var], &grids[&step.y_var], &link))
        .collect::<Result<_>>()?;
    let vars: Vec<String> = grids.keys().cloned().collect();
    let rugs = rug_data(t, &vars)?;
    let spec = zpdp_spec(&seq, &surfaces, &rugs, cfg.join)?;
    Ok((seq, spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::func::FnPredictor;
    use crate::netgraph::{build_graph, ViviEdge, ViviNode};
    use crate::plotspec::render_svg;
    use crate::rng;
    use crate::tabular::Column;
    use crate::vivi::ViviMatrix;

    fn uniform_table(n: usize, names: &[&str], seed: u64) -> Table {
        let mut cols = Vec::new();
        for (j, name) in names.iter().enumerate() {
            let mut r = rng::stream(seed, "col", j as u64);
            cols.push(Column::numeric(
                *name,
                (0..n).map(|_| rng::uniform01(&mut r)).collect(),
            ));
        }
        Table::new(cols).unwrap()
    }

    fn graph(names: &[&str], edges: &[(usize, usize, f64)]) -> ViviGraph {
        ViviGraph {
            nodes: names
                .iter()
                .map(|n| ViviNode { name: (*n).to_string(), importance: 1.0 })
                .collect(),
            edges: edges
                .iter()
                .map(|&(a, b, weight)| ViviEdge { a: a.min(b), b: a.max(b), weight })
                .collect(),
            isolated: vec![],
        }
    }

    #[test]
    fn single_edge_yields_one_panel_with_two_rugs() {
        let t = uniform_table(25, &["a", "b"], 1);
        let p = FnPredictor::regression(&["a", "b"], |x| x[0] * x[1]);
        let g = graph(&["a", "b"], &[(0, 1, 1.0)]);
        let (seq, spec) =
            build_zpdp(&p, &t, &g, &ZpdpConfig { grid_size: 5, ..Default::default() }).unwrap();
        assert_eq!(seq.total_steps(), 1);
        assert_eq!(spec.count_role(PanelRole::Zig), 1);
        let rugs = spec.panels[0]
            .shapes
            .iter()
            .filter(|s| matches!(s, Shape::Rug { .. }))
            .count();
        assert_eq!(rugs, 2);
        render_svg(&spec).unwrap();
    }

    #[test]
    fn consecutive_panels_share_the_middle_variable() {
        let t = uniform_table(20, &["a", "b", "c"], 2);
        let p = FnPredictor::regression(&["a", "b", "c"], |x| x[0] + x[1] + x[2]);
        // Path a-b-c with the heavier edge first: trail a -> b -> c.
        let g = graph(&["a", "b", "c"], &[(0, 1, 2.0), (1, 2, 1.0)]);
        let (seq, spec) =
            build_zpdp(&p, &t, &g, &ZpdpConfig { grid_size: 4, ..Default::default() }).unwrap();
        assert_eq!(seq.total_steps(), 2);
        let panels: Vec<&Panel> =
            spec.panels.iter().filter(|p| p.role == PanelRole::Zig).collect();
        assert_eq!(panels.len(), 2);
        // Both panels keep the shared variable b on the y axis.
        assert_eq!(panels[0].y_var.as_deref(), Some("b"));
        assert_eq!(panels[1].y_var.as_deref(), Some("b"));
        assert_eq!(panels[0].x_var.as_deref(), Some("a"));
        assert_eq!(panels[1].x_var.as_deref(), Some("c"));
        // Second panel sits to the right of the first.
        assert!(panels[1].x > panels[0].x);
        assert_eq!(panels[1].y, panels[0].y);
    }

    #[test]
    fn eight_edges_with_one_augmentation_give_nine_panels() {
        // Component A: triangle (n0,n1,n2) plus pendant edge n2-n3. Its odd
        // vertices n2, n3 are adjacent but no exact trail can start on the
        // heavy n0-n1 edge, so the repair duplicates n2-n3 (one extra step).
        // Component B: an even 4-cycle, traversed exactly once.
        let names = ["n0", "n1", "n2", "n3", "n4", "n5", "n6", "n7"];
        let edges = [
            (0, 1, 10.0),
            (1, 2, 1.0),
            (0, 2, 1.0),
            (2, 3, 2.0),
            (4, 5, 0.5),
            (5, 6, 0.5),
            (6, 7, 0.5),
            (4, 7, 0.5),
        ];
        let t = uniform_table(20, &names, 3);
        let p = FnPredictor::regression(&names, |x| x.iter().sum());
        let g = graph(&names, &edges);
        let (seq, spec) =
            build_zpdp(&p, &t, &g, &ZpdpConfig { grid_size: 3, ..Default::default() }).unwrap();
        assert_eq!(g.edges.len(), 8);
        assert_eq!(seq.total_steps(), 9, "8 edges + 1 augmented step");
        assert_eq!(spec.count_role(PanelRole::Zig), 9);
        let revisits: usize = seq
            .trails
            .iter()
            .flat_map(|t| &t.steps)
            .filter(|s| s.revisited)
            .count();
        assert_eq!(revisits, 1);
        render_svg(&spec).unwrap();
    }

    #[test]
    fn surface_mismatch_is_rejected() {
        let t = uniform_table(15, &["a", "b", "c"], 4);
        let p = FnPredictor::regression(&["a", "b", "c"], |x| x[0]);
        let g = graph(&["a", "b"], &[(0, 1, 1.0)]);
        let seq = eulerian(&g).unwrap();
        // Wrongly oriented surface: (b, a) instead of (a, b).
        let ga = make_grid(&t, "a", 3).unwrap();
        let gb = make_grid(&t, "b", 3).unwrap();
        let wrong = pdp_2d_linked(&p, &t, &gb, &ga, &LinkSpec::Identity).unwrap();
        let rugs = rug_data(&t, &["a".to_string(), "b".to_string()]).unwrap();
        assert!(zpdp_spec(&seq, &[wrong], &rugs, true).is_err());
        assert!(zpdp_spec(&seq, &[], &rugs, true).is_err());
    }

    #[test]
    fn unjoined_trails_stack_in_separate_blocks() {
        let t = uniform_table(15, &["a", "b", "c", "d"], 5);
        let p = FnPredictor::regression(&["a", "b", "c", "d"], |x| x[0] + x[1]);
        let g = graph(&["a", "b", "c", "d"], &[(0, 1, 2.0), (2, 3, 1.0)]);
        let (seq, spec) =
            build_zpdp(&p, &t, &g, &ZpdpConfig { grid_size: 3, join: false, ..Default::default() })
                .unwrap();
        assert_eq!(seq.trails.len(), 2);
        let panels: Vec<&Panel> =
            spec.panels.iter().filter(|p| p.role == PanelRole::Zig).collect();
        assert_eq!(panels.len(), 2);
        assert!(panels[1].y > panels[0].y, "second trail starts a new block");
        assert_eq!(panels[1].x, panels[0].x);
    }

    #[test]
    fn build_from_matrix_pipeline() {
        let t = uniform_table(30, &["a", "b", "c"], 6);
        let p = FnPredictor::regression(&["a", "b", "c"], |x| x[0] * x[1] + x[2]);
        let m = ViviMatrix {
            names: vec!["a".into(), "b".into(), "c".into()],
            values: vec![1.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 1.0],
            raw_importance: vec![1.0; 3],
            importance_tag: "supplied".into(),
            interaction_tag: "unnormalized-h".into(),
            scale: "response".into(),
            sample_rows: 0,
            seed: 0,
            flat_pairs: vec![],
            h2_above_one: vec![],
        };
        let g = build_graph(&m, 0.1);
        let (seq, spec) =
            build_zpdp(&p, &t, &g, &ZpdpConfig { grid_size: 4, ..Default::default() }).unwrap();
        assert_eq!(spec.count_role(PanelRole::Zig), seq.total_steps());
    }
}
