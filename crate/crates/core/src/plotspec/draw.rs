//! Shared geometry helpers for the display builders.

use crate::pdp::{Grid1D, GridPoints, PdpSurface};
use crate::plotspec::palettes::{ColorScale, MASK_GRAY};
use crate::plotspec::Shape;

/// Linear map from a value interval onto a pixel interval (which may be
/// inverted, e.g. y axes). A degenerate value interval is widened by 0.5 on
/// both sides so the midpoint lands mid-panel.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AxisMap {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl AxisMap {
    pub fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        if lo < hi {
            AxisMap { lo, hi, px_lo, px_hi }
        } else {
            AxisMap { lo: lo - 0.5, hi: hi + 0.5, px_lo, px_hi }
        }
    }

    pub fn map(&self, v: f64) -> f64 {
        let t = (v - self.lo) / (self.hi - self.lo);
        self.px_lo + t * (self.px_hi - self.px_lo)
    }
}

/// Positions grid points along an axis: numeric values themselves,
/// level indices for categorical grids.
pub(crate) fn grid_axis_values(grid: &Grid1D) -> Vec<f64> {
    match &grid.points {
        GridPoints::Numeric(v) => v.clone(),
        GridPoints::Categorical(levels) => (0..levels.len()).map(|i| i as f64).collect(),
    }
}

pub(crate) fn min_max(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

/// Thin border around a panel.
pub(crate) fn frame(x: f64, y: f64, w: f64, h: f64) -> Shape {
    Shape::Rect {
        x,
        y,
        w,
        h,
        fill: "none".to_string(),
        stroke: Some("#999999".to_string()),
        stroke_width: 0.75,
        opacity: 1.0,
    }
}

/// Paints a surface as one rect per grid cell, index-spaced; cell `[a][b]`
/// sits at column `a`, row `b` with `b = 0` at the bottom. Masked-out cells
/// are neutral gray.
pub(crate) fn raster_shapes(
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    surface: &PdpSurface,
    scale: &ColorScale,
) -> Vec<Shape> {
    let nj = surface.grid_j.len();
    let nk = surface.grid_k.len();
    let cw = w / nj as f64;
    let ch = h / nk as f64;
    let mut shapes = Vec::with_capacity(nj * nk);
    for a in 0..nj {
        for b in 0..nk {
            let fill = if surface.mask[a][b] {
                scale.color_at(surface.values[a][b]).to_string()
            } else {
                MASK_GRAY.to_string()
            };
            shapes.push(Shape::Rect {
                x: x + a as f64 * cw,
                y: y + h - (b + 1) as f64 * ch,
                w: cw,
                h: ch,
                fill,
                stroke: None,
                stroke_width: 0.0,
                opacity: 1.0,
            });
        }
    }
    shapes
}

/// Maps paired (x, y) values through their axes into polyline points.
pub(crate) fn map_points(xs: &[f64], ys: &[f64], xmap: &AxisMap, ymap: &AxisMap) -> Vec<[f64; 2]> {
    xs.iter().zip(ys).map(|(&x, &y)| [xmap.map(x), ymap.map(y)]).collect()
}
