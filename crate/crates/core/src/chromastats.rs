//! SDR-vs-HDR colour structure in ICtCp: hue stability, hue outliers,
//! chroma correlation and saturation enhancement by HDR luminance band.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::codec::{self, hue_diff, Ictcp, WhitePoint, XyzPlane};
use crate::plane::{ActiveArea, Plane};
use crate::stats::{self, PairMoments};
use crate::{Error, Result};

/// Minimum ICtCp chroma for a hue angle to be considered meaningful.
pub const DEFAULT_CHROMA_FLOOR: f64 = 0.005;

/// HDR luminance band edges, cd/m².
pub const BAND_LOW: f64 = 20.0;
pub const BAND_HIGH: f64 = 100.0;

/// HDR luminance band used for the per-band colour table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LuminanceBand {
    Below20,
    Mid20To100,
    Above100,
}

impl LuminanceBand {
    pub const ALL: [LuminanceBand; 3] = [Self::Below20, Self::Mid20To100, Self::Above100];

    /// `L < 20` → below, `20 ≤ L ≤ 100` → mid, `L > 100` → above.
    pub fn of(hdr_nits: f64) -> Self {
        if !(hdr_nits >= BAND_LOW) {
            Self::Below20
        } else if hdr_nits <= BAND_HIGH {
            Self::Mid20To100
        } else {
            Self::Above100
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Below20 => "<20 cd/m²",
            Self::Mid20To100 => "20–100 cd/m²",
            Self::Above100 => ">100 cd/m²",
        }
    }
}

impl fmt::Display for LuminanceBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorBinStats {
    pub band: LuminanceBand,
    /// Mean |Δh| in degrees over pixels where both chromas exceed the floor.
    pub mean_abs_dh: Option<f64>,
    pub p95_abs_dh: Option<f64>,
    /// Mean of C_HDR − C_SDR over all pixels in the band.
    pub mean_dc: Option<f64>,
    /// Share of chromatic pixels (either chroma above the floor) with
    /// C_HDR > C_SDR.
    pub enhancement_ratio: Option<f64>,
    /// Share of all valid pixels that fall in this band.
    pub pixel_ratio: f64,
    pub pixels: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalColorStats {
    pub mean_abs_dh: Option<f64>,
    pub p95_abs_dh: Option<f64>,
    /// Pearson correlation of C_SDR and C_HDR over all valid pixels.
    pub chroma_corr: Option<f64>,
    /// Enhancement ratio in the 20–100 cd/m² band.
    pub enhancement_mid: Option<f64>,
    pub mean_dc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorMetrics {
    pub global: GlobalColorStats,
    pub bands: [ColorBinStats; 3],
    pub chroma_floor: f64,
    pub pixels: u64,
    pub hue_pixels: u64,
}

/// Bradford-adapts both master XYZ planes to a common white.
pub fn align_whitepoints(sdr: &XyzPlane, hdr: &XyzPlane, target: WhitePoint) -> Result<(XyzPlane, XyzPlane)> {
    Ok((codec::adapt_plane(sdr, target)?, codec::adapt_plane(hdr, target)?))
}

/// Resolution of the pooled |Δh| histogram, degrees.
pub const HUE_HIST_STEP: f64 = 0.01;
const HUE_HIST_BINS: usize = 18_001;

/// Mergeable colour statistics for pooling many frames.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorAccumulator {
    pub chroma_floor: f64,
    /// |Δh| histogram per band (index = band), [0, 180] at 0.01°.
    pub hue_hist: [Vec<u64>; 3],
    pub hue_sum: [f64; 3],
    pub hue_count: [u64; 3],
    pub dc_sum: [f64; 3],
    pub pixels: [u64; 3],
    pub chromatic: [u64; 3],
    pub enhanced: [u64; 3],
    pub chroma: PairMoments,
}

impl ColorAccumulator {
    pub fn new(chroma_floor: f64) -> Self {
        Self {
            chroma_floor,
            hue_hist: [alloc::vec![0; HUE_HIST_BINS], alloc::vec![0; HUE_HIST_BINS], alloc::vec![0; HUE_HIST_BINS]],
            hue_sum: [0.0; 3],
            hue_count: [0; 3],
            dc_sum: [0.0; 3],
            pixels: [0; 3],
            chromatic: [0; 3],
            enhanced: [0; 3],
            chroma: PairMoments::default(),
        }
    }

    pub fn merge(&mut self, other: &Self) {
        for b in 0..3 {
            for (a, o) in self.hue_hist[b].iter_mut().zip(&other.hue_hist[b]) {
                *a += o;
            }
            self.hue_sum[b] += other.hue_sum[b];
            self.hue_count[b] += other.hue_count[b];
            self.dc_sum[b] += other.dc_sum[b];
            self.pixels[b] += other.pixels[b];
            self.chromatic[b] += other.chromatic[b];
            self.enhanced[b] += other.enhanced[b];
        }
        self.chroma.merge(&other.chroma);
    }

    /// Global |Δh| histogram (all bands).
    pub fn hue_histogram(&self) -> Vec<u64> {
        (0..HUE_HIST_BINS).map(|i| self.hue_hist.iter().map(|h| h[i]).sum()).collect()
    }

    fn hist_p95(hist: &[u64]) -> Option<f64> {
        let n: u64 = hist.iter().sum();
        if n == 0 {
            return None;
        }
        let rank = libm::ceil(0.95 * n as f64) as u64;
        let mut cum = 0u64;
        for (i, &c) in hist.iter().enumerate() {
            cum += c;
            if cum >= rank.max(1) {
                return Some(i as f64 * HUE_HIST_STEP);
            }
        }
        None
    }

    /// Pooled metrics. Percentiles are resolved to the histogram step.
    pub fn metrics(&self) -> ColorMetrics {
        let total: u64 = self.pixels.iter().sum();
        let ratio = |num: f64, den: u64| (den > 0).then(|| num / den as f64);
        let bands = LuminanceBand::ALL.map(|band| {
            let b = band as usize;
            ColorBinStats {
                band,
                mean_abs_dh: ratio(self.hue_sum[b], self.hue_count[b]),
                p95_abs_dh: Self::hist_p95(&self.hue_hist[b]),
                mean_dc: ratio(self.dc_sum[b], self.pixels[b]),
                enhancement_ratio: ratio(self.enhanced[b] as f64, self.chromatic[b]),
                pixel_ratio: ratio(self.pixels[b] as f64, total).unwrap_or(0.0),
                pixels: self.pixels[b],
            }
        });
        let hue_count: u64 = self.hue_count.iter().sum();
        ColorMetrics {
            global: GlobalColorStats {
                mean_abs_dh: ratio(self.hue_sum.iter().sum(), hue_count),
                p95_abs_dh: Self::hist_p95(&self.hue_histogram()),
                chroma_corr: self.chroma.correlation(),
                enhancement_mid: bands[1].enhancement_ratio,
                mean_dc: ratio(self.dc_sum.iter().sum(), total),
            },
            bands,
            chroma_floor: self.chroma_floor,
            pixels: total,
            hue_pixels: hue_count,
        }
    }
}

fn check_shapes(sdr: &Plane<Ictcp>, hdr: &Plane<Ictcp>, hdr_luma: &Plane<f64>) -> Result<()> {
    if sdr.same_shape(hdr) && sdr.same_shape(hdr_luma) {
        Ok(())
    } else {
        Err(Error::Registration("colour planes differ in size".into()))
    }
}

/// Exact per-frame colour metrics plus the mergeable accumulator for the
/// same pixels.
pub fn color_metrics_with_accumulator(
    sdr: &Plane<Ictcp>,
    hdr: &Plane<Ictcp>,
    hdr_luma: &Plane<f64>,
    area: &ActiveArea,
    chroma_floor: f64,
) -> Result<(ColorMetrics, ColorAccumulator)> {
    check_shapes(sdr, hdr, hdr_luma)?;
    let mut acc = ColorAccumulator::new(chroma_floor);
    let mut dh: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let stride = sdr.width();
    let n = area.pixel_count();
    let mut cs = Vec::with_capacity(n);
    let mut ch = Vec::with_capacity(n);
    for i in area.indices(stride) {
        let (s, h) = (&sdr.data()[i], &hdr.data()[i]);
        let b = LuminanceBand::of(hdr_luma.data()[i]) as usize;
        acc.pixels[b] += 1;
        acc.dc_sum[b] += h.c - s.c;
        cs.push(s.c);
        ch.push(h.c);
        if s.c > chroma_floor || h.c > chroma_floor {
            acc.chromatic[b] += 1;
            if h.c > s.c {
                acc.enhanced[b] += 1;
            }
        }
        if s.c > chroma_floor && h.c > chroma_floor {
            let d = hue_diff(s.h, h.h);
            acc.hue_sum[b] += d;
            acc.hue_count[b] += 1;
            let k = libm::round(d / HUE_HIST_STEP) as usize;
            acc.hue_hist[b][k.min(HUE_HIST_BINS - 1)] += 1;
            dh[b].push(d);
        }
    }
    acc.chroma = PairMoments::from_samples(&cs, &ch);

    let mut metrics = acc.metrics();
    // Replace histogram-resolved percentiles with exact nearest-rank ones.
    let mut all: Vec<f64> = dh.iter().flatten().copied().collect();
    metrics.global.p95_abs_dh = stats::percentile_nearest_rank(&mut all, 95.0);
    metrics.global.chroma_corr = stats::pearson(&cs, &ch);
    for (band, values) in metrics.bands.iter_mut().zip(dh.iter_mut()) {
        band.p95_abs_dh = stats::percentile_nearest_rank(values, 95.0);
    }
    Ok((metrics, acc))
}

/// Per-frame hue, chroma and saturation statistics over the area.
pub fn color_metrics(
    sdr: &Plane<Ictcp>,
    hdr: &Plane<Ictcp>,
    hdr_luma: &Plane<f64>,
    area: &ActiveArea,
    chroma_floor: f64,
) -> Result<ColorMetrics> {
    color_metrics_with_accumulator(sdr, hdr, hdr_luma, area, chroma_floor).map(|(m, _)| m)
}

/// 2-D density of (log10 L_H, ΔC) for plotting saturation change against
/// luminance. Out-of-range samples are clamped into the edge bins so the
/// total mass always equals the pixel count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationHistogram {
    pub log_lum_range: (f64, f64),
    pub lum_bins: usize,
    /// ΔC bin width; bins are centred on multiples of it, with the middle
    /// bin centred on 0.
    pub dc_step: f64,
    pub dc_bins: usize,
    /// Row-major: `counts[dc_bin * lum_bins + lum_bin]`.
    pub counts: Vec<u64>,
}

impl SaturationHistogram {
    pub const DEFAULT_LUM_BINS: usize = 128;
    pub const DEFAULT_DC_BINS: usize = 201;
    pub const DEFAULT_DC_STEP: f64 = 0.001;

    pub fn new(lum_bins: usize, dc_bins: usize, dc_step: f64) -> Self {
        assert!(lum_bins > 0 && dc_bins % 2 == 1 && dc_step > 0.0);
        Self {
            log_lum_range: (-4.0, 4.0),
            lum_bins,
            dc_step,
            dc_bins,
            counts: alloc::vec![0; lum_bins * dc_bins],
        }
    }

    pub fn dc_center(&self, row: usize) -> f64 {
        (row as f64 - (self.dc_bins / 2) as f64) * self.dc_step
    }

    pub fn dc_row(&self, dc: f64) -> usize {
        let half = (self.dc_bins / 2) as f64;
        let r = libm::floor(dc / self.dc_step + half + 0.5);
        r.clamp(0.0, (self.dc_bins - 1) as f64) as usize
    }

    pub fn lum_col(&self, hdr_nits: f64) -> usize {
        let (lo, hi) = self.log_lum_range;
        let x = crate::lumamap::log_luminance(hdr_nits);
        let c = libm::floor((x - lo) / (hi - lo) * self.lum_bins as f64);
        c.clamp(0.0, (self.lum_bins - 1) as f64) as usize
    }

    pub fn add(&mut self, hdr_nits: f64, dc: f64) {
        let k = self.dc_row(dc) * self.lum_bins + self.lum_col(hdr_nits);
        self.counts[k] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_total(&self, row: usize) -> u64 {
        self.counts[row * self.lum_bins..(row + 1) * self.lum_bins].iter().sum()
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

impl Default for SaturationHistogram {
    fn default() -> Self {
        Self::new(Self::DEFAULT_LUM_BINS, Self::DEFAULT_DC_BINS, Self::DEFAULT_DC_STEP)
    }
}

/// Histogram of (HDR luminance, ΔC) over the area.
pub fn saturation_histogram(
    sdr: &Plane<Ictcp>,
    hdr: &Plane<Ictcp>,
    hdr_luma: &Plane<f64>,
    area: &ActiveArea,
    mut hist: SaturationHistogram,
) -> Result<SaturationHistogram> {
    check_shapes(sdr, hdr, hdr_luma)?;
    for i in area.indices(sdr.width()) {
        hist.add(hdr_luma.data()[i], hdr.data()[i].c - sdr.data()[i].c);
    }
    Ok(hist)
}
