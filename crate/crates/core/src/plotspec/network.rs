//! Network display: nodes sized and greened by importance, edges widened
//! and purpled by interaction, radial or force-directed layout, optional
//! cluster hulls.

use crate::error::Error;
use crate::pdp::hull::convex_hull;
use crate::plotspec::palettes::{ColorScale, PaletteId, CATEGORY_COLORS};
use crate::plotspec::{Anchor, Legend, Panel, PanelRole, PlotKind, PlotSpec, Shape};
use crate::netgraph::ViviGraph;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkLayout {
    /// Nodes clockwise from the top, in graph (seriation) order.
    Radial,
    /// Deterministic Fruchterman-Reingold from the radial start.
    Force,
}

const CX: f64 = 270.0;
const CY: f64 = 260.0;
const R: f64 = 185.0;

fn radial_positions(n: usize) -> Vec<(f64, f64)> {
    if n == 1 {
        return vec![(CX, CY)];
    }
    (0..n)
        .map(|i| {
            let theta = -std::f64::consts::FRAC_PI_2
                + 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            (CX + R * theta.cos(), CY + R * theta.sin())
        })
        .collect()
}

fn force_positions(g: &ViviGraph) -> Vec<(f64, f64)> {
    let n = g.nodes.len();
    let mut pos = radial_positions(n);
    if n <= 2 {
        return pos;
    }
    let area = (2.0 * R) * (2.0 * R);
    let k = (area / n as f64).sqrt() * 0.6;
    let iterations = 200;
    for it in 0..iterations {
        let temp = 30.0 * (1.0 - it as f64 / iterations as f64) + 0.5;
        let mut disp = vec![(0.0f64, 0.0f64); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = pos[i].0 - pos[j].0;
                let dy = pos[i].1 - pos[j].1;
                let dist = (dx * dx + dy * dy).sqrt().max(1e-6);
                let force = k * k / dist;
                disp[i].0 += dx / dist * force;
                disp[i].1 += dy / dist * force;
                disp[j].0 -= dx / dist * force;
                disp[j].1 -= dy / dist * force;
            }
        }
        for e in &g.edges {
            let dx = pos[e.a].0 - pos[e.b].0;
            let dy = pos[e.a].1 - pos[e.b].1;
            let dist = (dx * dx + dy * dy).sqrt().max(1e-6);
            let force = dist * dist / k;
            disp[e.a].0 -= dx / dist * force;
            disp[e.a].1 -= dy / dist * force;
            disp[e.b].0 += dx / dist * force;
            disp[e.b].1 += dy / dist * force;
        }
        for i in 0..n {
            let (dx, dy) = disp[i];
            let len = (dx * dx + dy * dy).sqrt().max(1e-6);
            let step = len.min(temp);
            pos[i].0 += dx / len * step;
            pos[i].1 += dy / len * step;
        }
    }
    // Rescale into the canvas box.
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pos {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    let span_x = (max_x - min_x).max(1e-6);
    let span_y = (max_y - min_y).max(1e-6);
    pos.iter()
        .map(|&(x, y)| {
            (
                CX - R + (x - min_x) / span_x * 2.0 * R,
                CY - R + (y - min_y) / span_y * 2.0 * R,
            )
        })
        .collect()
}

/// Builds the network display. `clusters`, when given, must assign one label
/// per node; clusters of three or more nodes get a translucent hull.
pub fn network_spec(
    g: &ViviGraph,
    layout: NetworkLayout,
    clusters: Option<&[usize]>,
) -> Result<PlotSpec> {
    let n = g.nodes.len();
    if n == 0 {
        return Err(Error::arg("network display needs at least one node"));
    }
    if let Some(labels) = clusters {
        if labels.len() != n {
            return Err(Error::arg("cluster labels must cover every node"));
        }
    }
    let pos = match layout {
        NetworkLayout::Radial => radial_positions(n),
        NetworkLayout::Force => force_positions(g),
    };

    let imp_scale =
        ColorScale::from_values(PaletteId::GreenSeq, g.nodes.iter().map(|nd| nd.importance));
    let weight_scale =
        ColorScale::from_values(PaletteId::PurpleSeq, g.edges.iter().map(|e| e.weight));

    let mut spec = PlotSpec::new(PlotKind::Network, 660.0, 520.0);
    let mut canvas = Panel {
        role: PanelRole::Canvas,
        x: 0.0,
        y: 0.0,
        width: 660.0,
        height: 520.0,
        title: None,
        x_var: None,
        y_var: None,
        shapes: Vec::new(),
    };

    if let Some(labels) = clusters {
        let n_clusters = labels.iter().copied().max().map_or(0, |m| m + 1);
        for cluster in 0..n_clusters {
            let members: Vec<(f64, f64)> = (0..n)
                .filter(|&i| labels[i] == cluster)
                .map(|i| pos[i])
                .collect();
            if members.len() < 3 {
                continue;
            }
            let hull = convex_hull(&members);
            if hull.len() < 3 {
                continue;
            }
            let cx = hull.iter().map(|p| p.0).sum::<f64>() / hull.len() as f64;
            let cy = hull.iter().map(|p| p.1).sum::<f64>() / hull.len() as f64;
            let inflated: Vec<[f64; 2]> = hull
                .iter()
                .map(|&(x, y)| [cx + (x - cx) * 1.3, cy + (y - cy) * 1.3])
                .collect();
            canvas.shapes.push(Shape::Polygon {
                points: inflated,
                fill: CATEGORY_COLORS[cluster % CATEGORY_COLORS.len()].to_string(),
                opacity: 0.15,
            });
        }
    }

    // Heavier edges drawn last so they sit on top.
    let mut edge_order: Vec<usize> = (0..g.edges.len()).collect();
    edge_order.sort_by(|&x, &y| {
        let (ex, ey) = (&g.edges[x], &g.edges[y]);
        ex.weight
            .partial_cmp(&ey.weight)
            .unwrap()
            .then(ex.a.cmp(&ey.a))
            .then(ex.b.cmp(&ey.b))
    });
    let (w_min, w_max) = (1.5, 7.0);
    for idx in edge_order {
        let e = &g.edges[idx];
        let width = if weight_scale.is_degenerate() {
            w_max
        } else {
            let t = (e.weight - weight_scale.min) / (weight_scale.max - weight_scale.min);
            w_min + t * (w_max - w_min)
        };
        canvas.shapes.push(Shape::Line {
            x1: pos[e.a].0,
            y1: pos[e.a].1,
            x2: pos[e.b].0,
            y2: pos[e.b].1,
            stroke: weight_scale.color_at(e.weight).to_string(),
            width,
            opacity: 0.9,
        });
    }

    let (r_min, r_max) = (7.0, 19.0);
    for (i, node) in g.nodes.iter().enumerate() {
        let radius = if imp_scale.is_degenerate() {
            r_max
        } else {
            let t = (node.importance - imp_scale.min) / (imp_scale.max - imp_scale.min);
            r_min + t * (r_max - r_min)
        };
        let stroke = clusters
            .map(|labels| CATEGORY_COLORS[labels[i] % CATEGORY_COLORS.len()].to_string())
            .unwrap_or_else(|| "#333333".to_string());
        canvas.shapes.push(Shape::Circle {
            cx: pos[i].0,
            cy: pos[i].1,
            r: radius,
            fill: imp_scale.color_at(node.importance).to_string(),
            stroke: Some(stroke),
            stroke_width: 1.5,
            opacity: 1.0,
        });
        let dx = pos[i].0 - CX;
        let outward = if dx >= 0.0 { 1.0 } else { -1.0 };
        canvas.shapes.push(Shape::Text {
            x: pos[i].0 + outward * (radius + 4.0),
            y: pos[i].1 + 4.0,
            content: node.name.clone(),
            size: 10.0,
            anchor: if outward > 0.0 { Anchor::Start } else { Anchor::End },
            rotate: 0.0,
            fill: "#000000".to_string(),
        });
    }

    spec.panels.push(canvas);
    spec.legends.push(Legend { title: "Vimp".to_string(), scale: imp_scale });
    if !g.edges.is_empty() {
        spec.legends.push(Legend { title: "Vint".to_string(), scale: weight_scale });
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::{ViviEdge, ViviNode};
    use crate::plotspec::render_svg;

    fn graph(n: usize, edges: &[(usize, usize, f64)]) -> ViviGraph {
        ViviGraph {
            nodes: (0..n)
                .map(|i| ViviNode { name: format!("n{i}"), importance: (i + 1) as f64 })
                .collect(),
            edges: edges
                .iter()
                .map(|&(a, b, weight)| ViviEdge { a, b, weight })
                .collect(),
            isolated: vec![],
        }
    }

    #[test]
    fn single_node_renders_one_circle_and_no_edges() {
        let g = graph(1, &[]);
        let spec = network_spec(&g, NetworkLayout::Radial, None).unwrap();
        let circles = spec.panels[0]
            .shapes
            .iter()
            .filter(|s| matches!(s, Shape::Circle { .. }))
            .count();
        let lines = spec.panels[0]
            .shapes
            .iter()
            .filter(|s| matches!(s, Shape::Line { .. }))
            .count();
        assert_eq!(circles, 1);
        assert_eq!(lines, 0);
        assert_eq!(spec.legends.len(), 1);
        render_svg(&spec).unwrap();
    }

    #[test]
    fn two_nodes_one_edge_draws_the_edge_at_maximum_width() {
        let g = graph(2, &[(0, 1, 0.4)]);
        let spec = network_spec(&g, NetworkLayout::Radial, None).unwrap();
        let widths: Vec<f64> = spec.panels[0]
            .shapes
            .iter()
            .filter_map(|s| match s {
                Shape::Line { width, .. } => Some(*width),
                _ => None,
            })
            .collect();
        assert_eq!(widths, vec![7.0]);
    }

    #[test]
    fn radial_layout_starts_at_the_top_and_goes_clockwise() {
        let g = graph(4, &[(0, 1, 1.0)]);
        let spec = network_spec(&g, NetworkLayout::Radial, None).unwrap();
        let centers: Vec<(f64, f64)> = spec.panels[0]
            .shapes
            .iter()
            .filter_map(|s| match s {
                Shape::Circle { cx, cy, .. } => Some((*cx, *cy)),
                _ => None,
            })
            .collect();
        // Node 0 at 12 o'clock, node 1 at 3 o'clock (clockwise next).
        assert!((centers[0].0 - CX).abs() < 1e-9 && centers[0].1 < CY);
        assert!(centers[1].0 > CX && (centers[1].1 - CY).abs() < 1e-9);
    }

    #[test]
    fn cluster_hulls_appear_for_groups_of_three() {
        let g = graph(5, &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 0.5)]);
        let labels = vec![0, 0, 0, 1, 1];
        let spec = network_spec(&g, NetworkLayout::Force, Some(&labels)).unwrap();
        let polys = spec.panels[0]
            .shapes
            .iter()
            .filter(|s| matches!(s, Shape::Polygon { .. }))
            .count();
        assert_eq!(polys, 1, "only the 3-node cluster gets a hull");
        render_svg(&spec).unwrap();
        assert!(network_spec(&g, NetworkLayout::Radial, Some(&[0])).is_err());
    }
}
