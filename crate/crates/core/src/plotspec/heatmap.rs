//! Heatmap display: importance on the diagonal (green), interaction off it
//! (purple), variables arranged by a seriation ordering, optionally
//! restricted to the leading variables.

use crate::arrange::Ordering;
use crate::error::Error;
use crate::plotspec::palettes::{ColorScale, PaletteId};
use crate::plotspec::{Anchor, Legend, Panel, PanelRole, PlotKind, PlotSpec, Shape};
use crate::vivi::ViviMatrix;
use crate::Result;

/// Shared color-scale limits, for comparing heatmaps of different fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapLimits {
    pub importance: (f64, f64),
    pub interaction: (f64, f64),
}

/// Limits spanning several matrices; two heatmaps built with the same
/// limits color identical values identically.
pub fn matrix_limits(matrices: &[&ViviMatrix]) -> HeatmapLimits {
    let mut imp = (f64::INFINITY, f64::NEG_INFINITY);
    let mut inter = (f64::INFINITY, f64::NEG_INFINITY);
    for m in matrices {
        let p = m.p();
        for i in 0..p {
            imp.0 = imp.0.min(m.importance(i));
            imp.1 = imp.1.max(m.importance(i));
            for j in 0..p {
                if i != j {
                    inter.0 = inter.0.min(m.get(i, j));
                    inter.1 = inter.1.max(m.get(i, j));
                }
            }
        }
    }
    if !imp.0.is_finite() {
        imp = (0.0, 0.0);
    }
    if !inter.0.is_finite() {
        inter = (0.0, 0.0);
    }
    HeatmapLimits { importance: imp, interaction: inter }
}

/// Heatmap with color limits taken from the matrix itself.
pub fn heatmap_spec(
    m: &ViviMatrix,
    order: &Ordering,
    filter_top: Option<usize>,
) -> Result<PlotSpec> {
    heatmap_spec_with_limits(m, order, filter_top, None)
}

pub fn heatmap_spec_with_limits(
    m: &ViviMatrix,
    order: &Ordering,
    filter_top: Option<usize>,
    limits: Option<&HeatmapLimits>,
) -> Result<PlotSpec> {
    let p = m.p();
    if order.order.len() != p {
        return Err(Error::arg("ordering does not cover the matrix variables"));
    }
    let mut seen = vec![false; p];
    for &i in &order.order {
        if i >= p || seen[i] {
            return Err(Error::arg("ordering is not a permutation of the variables"));
        }
        seen[i] = true;
    }
    if let Some(ft) = filter_top {
        if ft < 1 {
            return Err(Error::arg("filter_top must be at least 1"));
        }
    }
    let k = filter_top.map_or(p, |ft| ft.min(p));
    let shown: Vec<usize> = order.order[..k].to_vec();

    let own_limits = matrix_limits(&[m]);
    let limits = limits.copied().unwrap_or(own_limits);
    let imp_scale =
        ColorScale::new(PaletteId::GreenSeq, limits.importance.0, limits.importance.1);
    let int_scale =
        ColorScale::new(PaletteId::PurpleSeq, limits.interaction.0, limits.interaction.1);

    let margin_left = 110.0;
    let margin_top = 110.0;
    let plot = 420.0;
    let legend_w = 110.0;
    let cell = plot / k as f64;
    let mut spec = PlotSpec::new(
        PlotKind::Heatmap,
        margin_left + plot + legend_w,
        margin_top + plot + 24.0,
    );

    let mut labels = Panel {
        role: PanelRole::Canvas,
        x: 0.0,
        y: 0.0,
        width: spec.width,
        height: spec.height,
        title: None,
        x_var: None,
        y_var: None,
        shapes: Vec::new(),
    };
    for (pos, &var) in shown.iter().enumerate() {
        labels.shapes.push(Shape::Text {
            x: margin_left - 6.0,
            y: margin_top + (pos as f64 + 0.5) * cell + 3.0,
            content: m.names[var].clone(),
            size: 10.0,
            anchor: Anchor::End,
            rotate: 0.0,
            fill: "#000000".to_string(),
        });
        labels.shapes.push(Shape::Text {
            x: margin_left + (pos as f64 + 0.5) * cell,
            y: margin_top - 8.0,
            content: m.names[var].clone(),
            size: 10.0,
            anchor: Anchor::Start,
            rotate: -45.0,
            fill: "#000000".to_string(),
        });
    }
    spec.panels.push(labels);

    for (r, &vr) in shown.iter().enumerate() {
        for (c, &vc) in shown.iter().enumerate() {
            let value = m.get(vr, vc);
            let role = match r.cmp(&c) {
                std::cmp::Ordering::Equal => PanelRole::Diagonal,
                std::cmp::Ordering::Less => PanelRole::Upper,
                std::cmp::Ordering::Greater => PanelRole::Lower,
            };
            let fill = if role == PanelRole::Diagonal {
                imp_scale.color_at(value)
            } else {
                int_scale.color_at(value)
            };
            let (px, py) = (margin_left + c as f64 * cell, margin_top + r as f64 * cell);
            spec.panels.push(Panel {
                role,
                x: px,
                y: py,
                width: cell,
                height: cell,
                title: None,
                x_var: Some(m.names[vc].clone()),
                y_var: Some(m.names[vr].clone()),
                shapes: vec![Shape::Rect {
                    x: px,
                    y: py,
                    w: cell,
                    h: cell,
                    fill: fill.to_string(),
                    stroke: Some("#ffffff".to_string()),
                    stroke_width: 0.5,
                    opacity: 1.0,
                }],
            });
        }
    }

    spec.legends.push(Legend { title: "Vimp".to_string(), scale: imp_scale });
    if p > 1 {
        spec.legends.push(Legend { title: "Vint".to_string(), scale: int_scale });
    }
    Ok(spec)
}
