//! Deterministic SVG 1.1 compiler for plot specs.
//!
//! Numbers are written with six significant digits, text is XML-escaped,
//! and nothing depends on time, randomness, or memory layout, so a spec
//! always renders to identical bytes.

use std::fmt::Write as _;

use crate::plotspec::{Anchor, Legend, Orientation, Panel, PlotSpec, Shape};
use crate::Result;

/// Formats a float rounded to six significant digits, shortest form.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let exponent = v.abs().log10().floor() as i32;
    let factor = 10f64.powi(5 - exponent);
    let rounded = (v * factor).round() / factor;
    format!("{rounded}")
}

fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn write_shape(out: &mut String, shape: &Shape) {
    match shape {
        Shape::Rect { x, y, w, h, fill, stroke, stroke_width, opacity } => {
            write!(
                out,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}""#,
                fmt_num(*x),
                fmt_num(*y),
                fmt_num(*w),
                fmt_num(*h),
                fill
            )
            .unwrap();
            if let Some(stroke) = stroke {
                write!(out, r#" stroke="{}" stroke-width="{}""#, stroke, fmt_num(*stroke_width))
                    .unwrap();
            }
            if *opacity < 1.0 {
                write!(out, r#" opacity="{}""#, fmt_num(*opacity)).unwrap();
            }
            out.push_str("/>\n");
        }
        Shape::Circle { cx, cy, r, fill, stroke, stroke_width, opacity } => {
            write!(
                out,
                r#"<circle cx="{}" cy="{}" r="{}" fill="{}""#,
                fmt_num(*cx),
                fmt_num(*cy),
                fmt_num(*r),
                fill
            )
            .unwrap();
            if let Some(stroke) = stroke {
                write!(out, r#" stroke="{}" stroke-width="{}""#, stroke, fmt_num(*stroke_width))
                    .unwrap();
            }
            if *opacity < 1.0 {
                write!(out, r#" opacity="{}""#, fmt_num(*opacity)).unwrap();
            }
            out.push_str("/>\n");
        }
        Shape::Line { x1, y1, x2, y2, stroke, width, opacity } => {
            write!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="{}""#,
                fmt_num(*x1),
                fmt_num(*y1),
                fmt_num(*x2),
                fmt_num(*y2),
                stroke,
                fmt_num(*width)
            )
            .unwrap();
            if *opacity < 1.0 {
                write!(out, r#" opacity="{}""#, fmt_num(*opacity)).unwrap();
            }
            out.push_str("/>\n");
        }
        Shape::Polyline { points, stroke, width, opacity } => {
            out.push_str("<polyline points=\"");
            for (i, p) in points.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write!(out, "{},{}", fmt_num(p[0]), fmt_num(p[1])).unwrap();
            }
            write!(
                out,
                r#"" fill="none" stroke="{}" stroke-width="{}""#,
                stroke,
                fmt_num(*width)
            )
            .unwrap();
            if *opacity < 1.0 {
                write!(out, r#" opacity="{}""#, fmt_num(*opacity)).unwrap();
            }
            out.push_str("/>\n");
        }
        Shape::Polygon { points, fill, opacity } => {
            out.push_str("<polygon points=\"");
            for (i, p) in points.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write!(out, "{},{}", fmt_num(p[0]), fmt_num(p[1])).unwrap();
            }
            write!(out, r#"" fill="{fill}""#).unwrap();
            if *opacity < 1.0 {
                write!(out, r#" opacity="{}""#, fmt_num(*opacity)).unwrap();
            }
            out.push_str("/>\n");
        }
        Shape::Text { x, y, content, size, anchor, rotate, fill } => {
            let anchor = match anchor {
                Anchor::Start => "start",
                Anchor::Middle => "middle",
                Anchor::End => "end",
            };
            write!(
                out,
                r#"<text x="{}" y="{}" font-size="{}" font-family="sans-serif" text-anchor="{}" fill="{}""#,
                fmt_num(*x),
                fmt_num(*y),
                fmt_num(*size),
                anchor,
                fill
            )
            .unwrap();
            if *rotate != 0.0 {
                write!(
                    out,
                    r#" transform="rotate({} {} {})""#,
                    fmt_num(*rotate),
                    fmt_num(*x),
                    fmt_num(*y)
                )
                .unwrap();
            }
            writeln!(out, ">{}</text>", escape_xml(content)).unwrap();
        }
        Shape::Rug { orientation, base, positions, length, color, opacity } => {
            out.push_str("<g>\n");
            for &pos in positions {
                match orientation {
                    Orientation::Horizontal => writeln!(
                        out,
                        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"1\" opacity=\"{}\"/>",
                        fmt_num(pos),
                        fmt_num(*base),
                        fmt_num(pos),
                        fmt_num(base + length),
                        color,
                        fmt_num(*opacity)
                    )
                    .unwrap(),
                    Orientation::Vertical => writeln!(
                        out,
                        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"1\" opacity=\"{}\"/>",
                        fmt_num(*base),
                        fmt_num(pos),
                        fmt_num(base + length),
                        fmt_num(pos),
                        color,
                        fmt_num(*opacity)
                    )
                    .unwrap(),
                }
            }
            out.push_str("</g>\n");
        }
    }
}

fn write_panel(out: &mut String, panel: &Panel) {
    out.push_str("<g>\n");
    for shape in &panel.shapes {
        write_shape(out, shape);
    }
    if let Some(title) = &panel.title {
        write_shape(
            out,
            &Shape::Text {
                x: panel.x + panel.width / 2.0,
                y: panel.y - 4.0,
                content: title.clone(),
                size: 11.0,
                anchor: Anchor::Middle,
                rotate: 0.0,
                fill: "#000000".to_string(),
            },
        );
    }
    out.push_str("</g>\n");
}

fn write_legend(out: &mut String, legend: &Legend, x: f64, y: f64) {
    let colors = legend.scale.palette.colors();
    let swatch = 14.0;
    write_shape(
        out,
        &Shape::Text {
            x,
            y: y - 6.0,
            content: legend.title.clone(),
            size: 11.0,
            anchor: Anchor::Start,
            rotate: 0.0,
            fill: "#000000".to_string(),
        },
    );
    // Top swatch is the high end.
    for (i, color) in colors.iter().rev().enumerate() {
        write_shape(
            out,
            &Shape::Rect {
                x,
                y: y + i as f64 * swatch,
                w: swatch,
                h: swatch,
                fill: (*color).to_string(),
                stroke: Some("#888888".to_string()),
                stroke_width: 0.25,
                opacity: 1.0,
            },
        );
    }
    let labels = [
        (legend.scale.max, y + 10.0),
        (legend.scale.min, y + colors.len() as f64 * swatch),
    ];
    for (value, ly) in labels {
        write_shape(
            out,
            &Shape::Text {
                x: x + swatch + 4.0,
                y: ly,
                content: fmt_num(value),
                size: 10.0,
                anchor: Anchor::Start,
                rotate: 0.0,
                fill: "#000000".to_string(),
            },
        );
    }
}

/// Compiles a spec to a complete SVG document.
pub fn render_svg(spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        fmt_num(spec.width),
        fmt_num(spec.height),
        fmt_num(spec.width),
        fmt_num(spec.height)
    )
    .unwrap();
    writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
        fmt_num(spec.width),
        fmt_num(spec.height)
    )
    .unwrap();
    for panel in &spec.panels {
        write_panel(&mut out, panel);
    }
    for (i, legend) in spec.legends.iter().enumerate() {
        let x = spec.width - 90.0;
        let y = 30.0 + i as f64 * 180.0;
        write_legend(&mut out, legend, x, y);
    }
    for (i, note) in spec.notes.iter().enumerate() {
        write_shape(
            &mut out,
            &Shape::Text {
                x: 8.0,
                y: spec.height - 8.0 - 14.0 * i as f64,
                content: note.clone(),
                size: 11.0,
                anchor: Anchor::Start,
                rotate: 0.0,
                fill: "#555555".to_string(),
            },
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plotspec::PlotKind;

    #[test]
    fn number_formatting_keeps_six_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(123.456789), "123.457");
        assert_eq!(fmt_num(0.000123456789), "0.000123457");
        assert_eq!(fmt_num(-9876543.21), "-9876540");
    }

    #[test]
    fn rendering_is_deterministic_and_escapes_text() {
        let mut spec = PlotSpec::new(PlotKind::Network, 200.0, 100.0);
        spec.notes.push("a<b & \"c\"".to_string());
        let one = render_svg(&spec).unwrap();
        let two = render_svg(&spec).unwrap();
        assert_eq!(one, two);
        assert!(one.contains("a&lt;b &amp; &quot;c&quot;"));
        assert!(one.starts_with("<?xml"));
        assert!(one.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_spec_is_a_valid_minimal_document() {
        let spec = PlotSpec::new(PlotKind::Heatmap, 64.0, 64.0);
        let svg = render_svg(&spec).unwrap();
        assert!(svg.contains("<svg xmlns"));
        assert_eq!(svg.matches("<rect").count(), 1);
    }
}
