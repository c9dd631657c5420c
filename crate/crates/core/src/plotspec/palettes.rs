//! Pinned color tables and value-to-color scales.
//!
//! Three fixed lookup tables: a 9-step green sequential scale for
//! importance, a 9-step purple sequential scale for interaction (both
//! ordered low to high intensity, colorblind-friendly single hues), and an
//! 11-step blue-yellow-red diverging scale for predictions. Colors come from
//! tables rather than a color-science dependency so output is reproducible
//! byte for byte.

use serde::{Deserialize, Serialize};

pub const GREEN_SEQ: [&str; 9] = [
    "#f7fcf5", "#e5f5e0", "#c7e9c0", "#a1d99b", "#74c476", "#41ab5d", "#238b45", "#006d2c",
    "#00441b",
];

pub const PURPLE_SEQ: [&str; 9] = [
    "#fcfbfd", "#efedf5", "#dadaeb", "#bcbddc", "#9e9ac8", "#807dba", "#6a51a3", "#54278f",
    "#3f007d",
];

/// Low = dark blue, midpoint = yellow, high = dark red.
pub const BLUE_YELLOW_RED: [&str; 11] = [
    "#313695", "#4575b4", "#74add1", "#abd9e9", "#e0f3f8", "#ffffbf", "#fee090", "#fdae61",
    "#f46d43", "#d73027", "#a50026",
];

/// Fill for masked-out (extrapolated) raster cells.
pub const MASK_GRAY: &str = "#cccccc";

/// Distinct colors for cluster hulls and categorical level curves.
pub const CATEGORY_COLORS: [&str; 8] = [
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#f781bf", "#999999",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PaletteId {
    GreenSeq,
    PurpleSeq,
    BlueYellowRed,
}

impl PaletteId {
    pub fn colors(self) -> &'static [&'static str] {
        match self {
            PaletteId::GreenSeq => &GREEN_SEQ,
            PaletteId::PurpleSeq => &PURPLE_SEQ,
            PaletteId::BlueYellowRed => &BLUE_YELLOW_RED,
        }
    }

    fn is_diverging(self) -> bool {
        matches!(self, PaletteId::BlueYellowRed)
    }
}

/// Linear binning of `[min, max]` onto a palette. Out-of-range values clamp
/// to the nearest end. A degenerate domain (`min >= max`) collapses to a
/// single color: the top of a sequential scale, the midpoint of the
/// diverging one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorScale {
    pub palette: PaletteId,
    pub min: f64,
    pub max: f64,
}

impl ColorScale {
    pub fn new(palette: PaletteId, min: f64, max: f64) -> Self {
        ColorScale { palette, min, max }
    }

    pub fn from_values(palette: PaletteId, values: impl IntoIterator<Item = f64>) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() || !max.is_finite() {
            (min, max) = (0.0, 0.0);
        }
        ColorScale { palette, min, max }
    }

    pub fn is_degenerate(&self) -> bool {
        self.min >= self.max || !self.min.is_finite() || !self.max.is_finite()
    }

    /// Palette index for a value; monotone in the value.
    pub fn index_of(&self, v: f64) -> usize {
        let colors = self.palette.colors();
        if self.is_degenerate() {
            return if self.palette.is_diverging() { colors.len() / 2 } else { colors.len() - 1 };
        }
        let t = ((v - self.min) / (self.max - self.min)).clamp(0.0, 1.0);
        ((t * colors.len() as f64) as usize).min(colors.len() - 1)
    }

    pub fn color_at(&self, v: f64) -> &'static str {
        self.palette.colors()[self.index_of(v)]
    }
}
