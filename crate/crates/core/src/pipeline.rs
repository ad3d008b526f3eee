//! Per-frame analysis passes that the CLI fans out over workers.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::chromastats::{
    color_metrics_with_accumulator, saturation_histogram, ColorAccumulator, ColorMetrics, SaturationHistogram,
    DEFAULT_CHROMA_FLOOR,
};
use crate::codec::Ictcp;
use crate::decision::{
    compute_gain, decision_map_from_ictcp, exr_ictcp, master_ictcp, structural_correlation, AnchorGain,
    DecisionCounts, DecisionMap, StructuralCorrelation, DEFAULT_ANCHOR_BAND, DEFAULT_MIN_ANCHOR_PIXELS,
    DEFAULT_THRESHOLD,
};
use crate::ingest::FrameTriplet;
use crate::lumamap::{
    fit_isotonic, gradient_correlation, log_luminance, log_plane, residual_energy, residual_features, residual_plane,
    BinAccumulator, GradientStats, MonotoneFit, ResidualEnergy, ResidualFeatures, DEFAULT_BINS,
};
use crate::plane::Plane;
use crate::{Error, Result};

/// Fixed log10 range shared by pooled (cross-frame) luminance statistics.
pub const POOLED_LOG_RANGE: (f64, f64) = (-4.0, 4.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub bins: usize,
    pub chroma_floor: f64,
    /// Bins of the pooled baseline accumulator.
    pub pooled_bins: usize,
    /// Side of the square log-luminance density grid.
    pub density_bins: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self { bins: DEFAULT_BINS, chroma_floor: DEFAULT_CHROMA_FLOOR, pooled_bins: 1024, density_bins: 256 }
    }
}

/// 2-D histogram of (log10 L_S, log10 L_H) over a fixed range, clamped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LumaDensity {
    pub range: (f64, f64),
    pub bins: usize,
    /// `counts[hdr_bin * bins + sdr_bin]`
    pub counts: Vec<u64>,
}

impl LumaDensity {
    pub fn new(bins: usize) -> Self {
        Self { range: POOLED_LOG_RANGE, bins, counts: alloc::vec![0; bins * bins] }
    }

    pub fn bin(&self, nits: f64) -> usize {
        let (lo, hi) = self.range;
        let t = (log_luminance(nits) - lo) / (hi - lo) * self.bins as f64;
        libm::floor(t).clamp(0.0, (self.bins - 1) as f64) as usize
    }

    pub fn add(&mut self, sdr: f64, hdr: f64) {
        let k = self.bin(hdr) * self.bins + self.bin(sdr);
        self.counts[k] += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Everything the luminance and colour passes produce for one frame.
#[derive(Clone, Debug)]
pub struct FrameAnalysis {
    pub frame_index: u32,
    pub pixels: usize,
    pub fit: MonotoneFit,
    /// Gradient correlation of log L_S and log L_H.
    pub gradient: Option<GradientStats>,
    pub features: ResidualFeatures,
    pub energy: ResidualEnergy,
    pub color: ColorMetrics,
    pub ictcp_clamped: usize,
    pub delta_l: Plane<f64>,
    pub sdr_ictcp: Plane<Ictcp>,
    pub hdr_ictcp: Plane<Ictcp>,
    /// Mergeable partials for corpus-level pooling.
    pub pooled: PooledPartials,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PooledPartials {
    pub color: ColorAccumulator,
    pub saturation: SaturationHistogram,
    pub baseline: BinAccumulator,
    pub density: LumaDensity,
}

impl PooledPartials {
    pub fn new(cfg: &AnalysisConfig) -> Self {
        Self {
            color: ColorAccumulator::new(cfg.chroma_floor),
            saturation: SaturationHistogram::default(),
            baseline: BinAccumulator::new(POOLED_LOG_RANGE.0, POOLED_LOG_RANGE.1, cfg.pooled_bins),
            density: LumaDensity::new(cfg.density_bins),
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.color.merge(&other.color);
        self.saturation.merge(&other.saturation);
        self.baseline.merge(&other.baseline);
        self.density.merge(&other.density);
    }
}

/// Luminance baseline, residual features and colour statistics for one
/// triplet over its active area.
pub fn analyze_frame(t: &FrameTriplet, cfg: &AnalysisConfig) -> Result<FrameAnalysis> {
    let area = t.active;
    if area.is_empty() {
        return Err(Error::EmptyInput("frame has no active area"));
    }
    let fit = fit_isotonic(&t.sdr_luma, &t.hdr_luma, &area, cfg.bins)?;
    let gradient = gradient_correlation(&log_plane(&t.sdr_luma), &log_plane(&t.hdr_luma), &area)?;
    let delta_l = residual_plane(&t.hdr_luma, &fit, &t.sdr_luma, &area);
    let features = residual_features(&delta_l, &area)?;
    let energy = residual_energy(&delta_l, &area);

    let (sdr, hdr) = master_ictcp(t)?;
    let (color, color_acc) =
        color_metrics_with_accumulator(&sdr.pixels, &hdr.pixels, &t.hdr_luma, &area, cfg.chroma_floor)?;
    let saturation = saturation_histogram(&sdr.pixels, &hdr.pixels, &t.hdr_luma, &area, SaturationHistogram::default())?;

    let mut pooled = PooledPartials::new(cfg);
    pooled.color = color_acc;
    pooled.saturation = saturation;
    for i in area.indices(t.width()) {
        let (s, h) = (t.sdr_luma.data()[i], t.hdr_luma.data()[i]);
        pooled.baseline.add(s, h);
        pooled.density.add(s, h);
    }

    Ok(FrameAnalysis {
        frame_index: t.frame_index,
        pixels: area.pixel_count(),
        fit,
        gradient,
        features,
        energy,
        color,
        ictcp_clamped: sdr.clamped + hdr.clamped,
        delta_l,
        sdr_ictcp: sdr.pixels,
        hdr_ictcp: hdr.pixels,
        pooled,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionConfig {
    /// Neutral band half-width; 0 gives the sign-only rule.
    pub threshold: f64,
    /// Anchor band as fractions of the SDR peak.
    pub anchor_band: (f64, f64),
    pub sdr_peak: f64,
    pub min_anchor_pixels: usize,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            anchor_band: DEFAULT_ANCHOR_BAND,
            sdr_peak: crate::codec::transfer::SDR_CINEMA_PEAK,
            min_anchor_pixels: DEFAULT_MIN_ANCHOR_PIXELS,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FrameDecision {
    pub frame_index: u32,
    pub gain: AnchorGain,
    pub map: DecisionMap,
    pub counts: DecisionCounts,
    pub structure: StructuralCorrelation,
    pub sdr_ictcp: Plane<Ictcp>,
    pub hdr_ictcp: Plane<Ictcp>,
}

/// Gain anchoring, ΔE maps, labels and cross-domain correlations.
pub fn decide_frame(t: &FrameTriplet, cfg: &DecisionConfig) -> Result<FrameDecision> {
    if t.active.is_empty() {
        return Err(Error::EmptyInput("frame has no active area"));
    }
    if !t.has_exr {
        return Err(Error::Config("decision maps need an EXR source".into()));
    }
    let band = (cfg.anchor_band.0 * cfg.sdr_peak, cfg.anchor_band.1 * cfg.sdr_peak);
    let gain = compute_gain(&t.exr_luma, &t.sdr_luma, &t.active, band, cfg.min_anchor_pixels)?;
    let exr = exr_ictcp(t, &gain)?;
    let (sdr, hdr) = master_ictcp(t)?;
    let map = decision_map_from_ictcp(&exr.pixels, &sdr.pixels, &hdr.pixels, &t.active, cfg.threshold, gain.gain)?;
    let structure = structural_correlation(t, &gain, &t.active)?;
    Ok(FrameDecision {
        frame_index: t.frame_index,
        gain,
        counts: map.counts(),
        map,
        structure,
        sdr_ictcp: sdr.pixels,
        hdr_ictcp: hdr.pixels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{build_triplet, MasterSpec};
    use crate::synth::{generate, SceneKind, SynthSpec};

    fn triplet(spec: &SynthSpec) -> FrameTriplet {
        let f = generate(spec).unwrap();
        build_triplet(0, f.exr, &f.sdr_codes, &f.hdr_codes, &MasterSpec::sdr_cinema(), &MasterSpec::hdr_cinema()).unwrap()
    }

    #[test]
    fn analysis_of_clean_textured_frame() {
        let t = triplet(&SynthSpec::new(96, 64, SceneKind::Textured, 4));
        let a = analyze_frame(&t, &AnalysisConfig::default()).unwrap();
        assert!(a.fit.r_squared.unwrap() > 0.999);
        assert!(a.gradient.unwrap().rho > 0.95);
        assert_eq!(a.pooled.density.total(), a.pixels as u64);
        assert_eq!(a.pooled.saturation.total(), a.pixels as u64);
    }

    #[test]
    fn titlecard_cannot_anchor() {
        let t = triplet(&SynthSpec::new(64, 48, SceneKind::Titlecard, 0));
        assert!(matches!(decide_frame(&t, &DecisionConfig::default()), Err(Error::Anchoring(_))));
    }

    #[test]
    fn decision_on_clean_default_rendering_runs() {
        let t = triplet(&SynthSpec::new(96, 64, SceneKind::Textured, 9));
        let d = decide_frame(&t, &DecisionConfig::default()).unwrap();
        assert!(d.gain.gain > 0.0);
        assert_eq!(d.counts.total(), t.active.pixel_count() as u64);
        assert!(d.structure.exr_hdr.unwrap() > 0.9);
    }
}
