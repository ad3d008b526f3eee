//! Small raster plots written as PNG: log-luminance density with the
//! pooled baseline and identity line, the |Δh| histogram, and the
//! ΔC-against-luminance heatmap.

use std::path::Path;

use anyhow::Result;
use hdrtriad_core::chromastats::{SaturationHistogram, HUE_HIST_STEP};
use hdrtriad_core::lumamap::log_luminance;
use hdrtriad_core::pipeline::LumaDensity;
use serde::{Deserialize, Serialize};

use crate::io;
use crate::report::BaselineKnot;

const WHITE: [u8; 3] = [255, 255, 255];
const BLACK: [u8; 3] = [0, 0, 0];
const RED: [u8; 3] = [220, 30, 30];
const BLUE: [u8; 3] = [40, 80, 230];

pub struct Canvas {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Canvas {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, rgb: WHITE.repeat(width * height) }
    }

    pub fn set(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            let i = (y as usize * self.width + x as usize) * 3;
            self.rgb[i..i + 3].copy_from_slice(&c);
        }
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    pub fn fill(&mut self, x0: usize, y0: usize, w: usize, h: usize, c: [u8; 3]) {
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                self.set(x as i64, y as i64, c);
            }
        }
    }

    pub fn line(&mut self, (mut x0, mut y0): (i64, i64), (x1, y1): (i64, i64), c: [u8; 3]) {
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let mut err = dx + dy;
        loop {
            self.set(x0, y0, c);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    /// Digits, `N` and `=` from a 3×5 bitmap font.
    pub fn text(&mut self, x: usize, y: usize, s: &str, scale: usize, c: [u8; 3]) {
        for (k, ch) in s.chars().enumerate() {
            let Some(rows) = glyph(ch) else { continue };
            for (r, bits) in rows.iter().enumerate() {
                for col in 0..3 {
                    if bits & (4 >> col) != 0 {
                        self.fill(x + (k * 4 + col) * scale, y + r * scale, scale, scale, c);
                    }
                }
            }
        }
    }

    pub fn save(self, path: &Path) -> Result<()> {
        io::write_rgb8(path, self.width, self.height, self.rgb)
    }
}

fn glyph(c: char) -> Option<[u8; 5]> {
    Some(match c {
        '0' => [7, 5, 5, 5, 7],
        '1' => [2, 6, 2, 2, 7],
        '2' => [7, 1, 7, 4, 7],
        '3' => [7, 1, 7, 1, 7],
        '4' => [5, 5, 7, 1, 1],
        '5' => [7, 4, 7, 1, 7],
        '6' => [7, 4, 7, 5, 7],
        '7' => [7, 1, 1, 1, 1],
        '8' => [7, 5, 7, 5, 7],
        '9' => [7, 5, 7, 1, 7],
        'N' => [5, 7, 7, 7, 5],
        '=' => [0, 7, 0, 7, 0],
        _ => return None,
    })
}

fn shade(count: u64, max: u64) -> [u8; 3] {
    if count == 0 || max == 0 {
        return WHITE;
    }
    let t = (count as f64).ln_1p() / (max as f64).ln_1p();
    let v = (230.0 * (1.0 - t)).round() as u8;
    [v, v, v]
}

pub const DENSITY_SIZE: usize = 512;

/// Square log-log axes shared by the density plot and its overlays.
#[derive(Clone, Copy, Debug)]
pub struct LogAxes {
    pub range: (f64, f64),
    pub size: usize,
}

impl LogAxes {
    pub fn px(&self, log_value: f64) -> f64 {
        let (lo, hi) = self.range;
        (log_value - lo) / (hi - lo) * (self.size - 1) as f64
    }

    pub fn x(&self, log_sdr: f64) -> i64 {
        self.px(log_sdr).round() as i64
    }

    pub fn y(&self, log_hdr: f64) -> i64 {
        (self.size - 1) as i64 - self.px(log_hdr).round() as i64
    }

    /// Row of the identity line at pixel column `x`.
    pub fn identity_y(&self, x: i64) -> i64 {
        (self.size - 1) as i64 - x
    }
}

/// Pixel positions of the baseline knots on the density axes.
pub fn baseline_trace(knots: &[BaselineKnot], axes: &LogAxes) -> Vec<(i64, i64)> {
    knots.iter().filter(|k| k.weight > 0).map(|k| (axes.x(k.log_sdr), axes.y(log_luminance(k.hdr)))).collect()
}

/// Largest vertical distance in pixels between baseline knots and the
/// identity line.
pub fn identity_offset(knots: &[BaselineKnot], axes: &LogAxes) -> i64 {
    baseline_trace(knots, axes).iter().map(|&(x, y)| (y - axes.identity_y(x)).abs()).max().unwrap_or(0)
}

pub fn density_plot(density: &LumaDensity, knots: &[BaselineKnot]) -> Canvas {
    let axes = LogAxes { range: density.range, size: DENSITY_SIZE };
    let mut c = Canvas::new(DENSITY_SIZE, DENSITY_SIZE);
    let max = density.counts.iter().copied().max().unwrap_or(0);
    let n = density.bins;
    for py in 0..DENSITY_SIZE {
        let hb = (DENSITY_SIZE - 1 - py) * n / DENSITY_SIZE;
        for px in 0..DENSITY_SIZE {
            let sb = px * n / DENSITY_SIZE;
            let count = density.counts[hb * n + sb];
            if count > 0 {
                c.set(px as i64, py as i64, shade(count, max));
            }
        }
    }
    for x in 0..DENSITY_SIZE as i64 {
        c.set(x, axes.identity_y(x), BLUE);
    }
    let trace = baseline_trace(knots, &axes);
    for w in trace.windows(2) {
        c.line(w[0], w[1], RED);
    }
    if let [only] = trace[..] {
        c.set(only.0, only.1, RED);
    }
    c
}

/// Bars of |Δh| from 0 to `max_deg` at `step_deg`; the last bar collects
/// everything beyond.
pub fn hue_plot(hist: &[u64], step_deg: f64, max_deg: f64) -> Canvas {
    let bars = (max_deg / step_deg).round() as usize;
    let per = (step_deg / HUE_HIST_STEP).round() as usize;
    let mut counts = vec![0u64; bars];
    for (i, &n) in hist.iter().enumerate() {
        counts[(i / per).min(bars - 1)] += n;
    }
    let (bar_w, height) = (2usize, 300usize);
    let mut c = Canvas::new(bars * bar_w, height);
    let max = counts.iter().copied().max().unwrap_or(0).max(1);
    for (b, &n) in counts.iter().enumerate() {
        let h = ((n as f64 / max as f64) * (height - 1) as f64).round() as usize;
        c.fill(b * bar_w, height - h, bar_w, h, BLACK);
    }
    c
}

/// Luminance on x, ΔC on y (positive up), with the total mass written in
/// the top-left corner.
pub fn saturation_plot(h: &SaturationHistogram) -> Canvas {
    let (sx, sy) = (4usize, 2usize);
    let mut c = Canvas::new(h.lum_bins * sx, h.dc_bins * sy);
    let max = h.counts.iter().copied().max().unwrap_or(0);
    for row in 0..h.dc_bins {
        for col in 0..h.lum_bins {
            let n = h.counts[row * h.lum_bins + col];
            if n > 0 {
                c.fill(col * sx, (h.dc_bins - 1 - row) * sy, sx, sy, shade(n, max));
            }
        }
    }
    let mid = (h.dc_bins - 1 - h.dc_bins / 2) * sy;
    for x in 0..c.width {
        if c.get(x, mid) == WHITE {
            c.set(x as i64, mid as i64, BLUE);
        }
    }
    c.text(4, 4, &format!("N={}", h.total()), 2, RED);
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    Density,
    Hue,
    Saturation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSummary {
    pub plots: Vec<String>,
    pub density_mass: u64,
    pub hue_mass: u64,
    pub saturation_mass: u64,
    pub baseline_identity_offset_px: i64,
}
