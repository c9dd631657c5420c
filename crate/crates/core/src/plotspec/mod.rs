//! Renderer-independent plot descriptions and deterministic compilation.
//!
//! Builders turn matrices, graphs, and partial dependence artifacts into a
//! [`PlotSpec`]: a list of positioned panels holding primitive shapes, plus
//! color-scale legends. A spec serializes losslessly to JSON
//! ([`render_json`]) and compiles to SVG 1.1 ([`svg::render_svg`]) with all
//! numbers at six significant digits, no timestamps, and no generated ids,
//! so identical specs yield byte-identical files.

pub mod gpdp;
pub mod heatmap;
pub mod network;
pub mod palettes;
pub mod svg;
pub mod zpdp;

mod draw;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

pub use palettes::{ColorScale, PaletteId};
pub use svg::render_svg;

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlotKind {
    Heatmap,
    Network,
    Gpdp,
    Zpdp,
}

/// Role of a panel within its display; counting panels by role is the
/// structural contract tests rely on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PanelRole {
    /// Free-form canvas (network display, heatmap frame).
    Canvas,
    /// Matrix diagonal cell (heatmap) or ICE/PD diagonal (pairs plot).
    Diagonal,
    /// Upper-triangle cell: interaction value or bivariate surface.
    Upper,
    /// Lower-triangle cell: interaction value or raw scatter.
    Lower,
    /// One step of a zigzag trail.
    Zig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Anchor {
    Start,
    Middle,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Geometry primitives. All coordinates are absolute canvas units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Rect {
        x: f64,
        y: f64,
        w: f64,
        h: f64,
        fill: String,
        stroke: Option<String>,
        stroke_width: f64,
        opacity: f64,
    },
    Circle {
        cx: f64,
        cy: f64,
        r: f64,
        fill: String,
        stroke: Option<String>,
        stroke_width: f64,
        opacity: f64,
    },
    Line {
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
        stroke: String,
        width: f64,
        opacity: f64,
    },
    Polyline {
        points: Vec<[f64; 2]>,
        stroke: String,
        width: f64,
        opacity: f64,
    },
    Polygon {
        points: Vec<[f64; 2]>,
        fill: String,
        opacity: f64,
    },
    Text {
        x: f64,
        y: f64,
        content: String,
        size: f64,
        anchor: Anchor,
        /// Degrees, clockwise, about the text position.
        rotate: f64,
        fill: String,
    },
    /// Tick marks along one axis, alpha-blended; `positions` are the
    /// along-axis coordinates, `base` the cross-axis anchor, ticks extend
    /// `length` units in the positive direction.
    Rug {
        orientation: Orientation,
        base: f64,
        positions: Vec<f64>,
        length: f64,
        color: String,
        opacity: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub role: PanelRole,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    pub title: Option<String>,
    pub x_var: Option<String>,
    pub y_var: Option<String>,
    pub shapes: Vec<Shape>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Legend {
    pub title: String,
    pub scale: ColorScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub spec_version: u32,
    pub kind: PlotKind,
    pub width: f64,
    pub height: f64,
    pub panels: Vec<Panel>,
    pub legends: Vec<Legend>,
    /// Human-readable remarks (e.g. an empty graph after filtering).
    pub notes: Vec<String>,
}

impl PlotSpec {
    pub fn new(kind: PlotKind, width: f64, height: f64) -> Self {
        PlotSpec {
            spec_version: SPEC_VERSION,
            kind,
            width,
            height,
            panels: Vec::new(),
            legends: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn count_role(&self, role: PanelRole) -> usize {
        self.panels.iter().filter(|p| p.role == role).count()
    }

    /// Every coordinate must be finite before rendering.
    pub fn validate(&self) -> Result<()> {
        let check = |v: f64, what: &str| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::data(format!("non-finite {what} in plot spec")))
            }
        };
        check(self.width, "canvas width")?;
        check(self.height, "canvas height")?;
        for panel in &self.panels {
            for v in [panel.x, panel.y, panel.width, panel.height] {
                check(v, "panel geometry")?;
            }
            for shape in &panel.shapes {
                let coords: Vec<f64> = match shape {
                    Shape::Rect { x, y, w, h, stroke_width, opacity, .. } => {
                        vec![*x, *y, *w, *h, *stroke_width, *opacity]
                    }
                    Shape::Circle { cx, cy, r, stroke_width, opacity, .. } => {
                        vec![*cx, *cy, *r, *stroke_width, *opacity]
                    }
                    Shape::Line { x1, y1, x2, y2, width, opacity, .. } => {
                        vec![*x1, *y1, *x2, *y2, *width, *opacity]
                    }
                    Shape::Polyline { points, width, opacity, .. } => {
                        let mut v: Vec<f64> = points.iter().flatten().copied().collect();
                        v.push(*width);
                        v.push(*opacity);
                        v
                    }
                    Shape::Polygon { points, opacity, .. } => {
                        let mut v: Vec<f64> = points.iter().flatten().copied().collect();
                        v.push(*opacity);
                        v
                    }
                    Shape::Text { x, y, size, rotate, .. } => vec![*x, *y, *size, *rotate],
                    Shape::Rug { base, positions, length, opacity, .. } => {
                        let mut v = positions.clone();
                        v.push(*base);
                        v.push(*length);
                        v.push(*opacity);
                        v
                    }
                };
                for v in coords {
                    check(v, "shape coordinate")?;
                }
            }
        }
        Ok(())
    }
}

/// Canvas-only spec carrying a notice, for pipelines whose filtering left
/// nothing to draw.
pub fn empty_plot(kind: PlotKind, note: impl Into<String>) -> PlotSpec {
    let mut spec = PlotSpec::new(kind, 420.0, 160.0);
    spec.notes.push(note.into());
    spec
}

/// Lossless JSON with stable key order.
pub fn render_json(spec: &PlotSpec) -> String {
    serde_json::to_string_pretty(spec).expect("plot spec serializes") + "\n"
}

pub fn spec_from_json(text: &str) -> Result<PlotSpec> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_byte_identical() {
        let mut spec = PlotSpec::new(PlotKind::Heatmap, 640.0, 480.0);
        spec.panels.push(Panel {
            role: PanelRole::Diagonal,
            x: 10.0,
            y: 10.0,
            width: 100.0,
            height: 100.0,
            title: Some("demo".into()),
            x_var: Some("a".into()),
            y_var: Some("a".into()),
            shapes: vec![
                Shape::Rect {
                    x: 10.0,
                    y: 10.0,
                    w: 100.0,
                    h: 100.0,
                    fill: "#00441b".into(),
                    stroke: None,
                    stroke_width: 0.0,
                    opacity: 1.0,
                },
                Shape::Text {
                    x: 0.1 + 0.2,
                    y: 1.0 / 3.0,
                    content: "x < 1 & \"y\"".into(),
                    size: 11.0,
                    anchor: Anchor::Middle,
                    rotate: -45.0,
                    fill: "#000000".into(),
                },
            ],
        });
        spec.legends.push(Legend {
            title: "Vimp".into(),
            scale: ColorScale::new(PaletteId::GreenSeq, 0.0, 2.5),
        });
        let one = render_json(&spec);
        let back = spec_from_json(&one).unwrap();
        assert_eq!(back, spec);
        assert_eq!(render_json(&back), one);
    }

    #[test]
    fn validate_rejects_non_finite_coordinates() {
        let mut spec = PlotSpec::new(PlotKind::Network, 100.0, 100.0);
        assert!(spec.validate().is_ok());
        spec.panels.push(Panel {
            role: PanelRole::Canvas,
            x: 0.0,
            y: 0.0,
            width: 100.0,
            height: 100.0,
            title: None,
            x_var: None,
            y_var: None,
            shapes: vec![Shape::Line {
                x1: f64::NAN,
                y1: 0.0,
                x2: 1.0,
                y2: 1.0,
                stroke: "#000".into(),
                width: 1.0,
                opacity: 1.0,
            }],
        });
        assert!(spec.validate().is_err());
    }
}
