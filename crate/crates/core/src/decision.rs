//! EXR-anchored decision maps: which master sits perceptually closer to
//! the gain-aligned scene-referred source at each pixel.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::chromastats::align_whitepoints;
use crate::codec::{self, delta_e_itp, Ictcp, WhitePoint};
use crate::ingest::{FrameTriplet, SceneCategory};
use crate::lumamap::{gradient_correlation, log_plane};
use crate::plane::{ActiveArea, Plane};
use crate::{stats, Error, Result};

/// Half-width of the neutral band in ΔE_ITP units (≈ JND).
pub const DEFAULT_THRESHOLD: f64 = 3.0;
/// Anchor band as fractions of the SDR peak.
pub const DEFAULT_ANCHOR_BAND: (f64, f64) = (0.1, 0.2);
pub const DEFAULT_MIN_ANCHOR_PIXELS: usize = 100;

/// Scalar mapping EXR relative luminance to SDR cd/m².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorGain {
    pub gain: f64,
    pub anchor_pixel_count: usize,
    /// SDR luminance band actually used, cd/m².
    pub anchor_band: (f64, f64),
    /// Whether the band had to be widened.
    pub widened: bool,
}

fn anchor_ratios(y_exr: &Plane<f64>, sdr: &Plane<f64>, area: &ActiveArea, band: (f64, f64)) -> Vec<f64> {
    area.indices(sdr.width())
        .filter_map(|i| {
            let (y, l) = (y_exr.data()[i], sdr.data()[i]);
            (y > 0.0 && l >= band.0 && l <= band.1).then(|| l / y)
        })
        .collect()
}

/// Median of L_S / Y_EXR over anchor pixels whose L_S lies in `band`
/// (cd/m²). With too few pixels the band is widened once to twice its
/// log width around its geometric centre.
pub fn compute_gain(
    y_exr: &Plane<f64>,
    sdr: &Plane<f64>,
    area: &ActiveArea,
    band: (f64, f64),
    min_pixels: usize,
) -> Result<AnchorGain> {
    if !y_exr.same_shape(sdr) {
        return Err(Error::Registration("EXR and SDR luminance planes differ in size".into()));
    }
    if !(band.0 > 0.0 && band.1 > band.0) {
        return Err(Error::Config(format!("invalid anchor band {:?}", band)));
    }
    let mut used = band;
    let mut widened = false;
    let mut ratios = anchor_ratios(y_exr, sdr, area, used);
    if ratios.len() < min_pixels.max(1) {
        let centre = libm::sqrt(band.0 * band.1);
        let spread = band.1 / band.0;
        used = (centre / spread, centre * spread);
        widened = true;
        ratios = anchor_ratios(y_exr, sdr, area, used);
    }
    if ratios.len() < min_pixels.max(1) {
        return Err(Error::Anchoring(format!(
            "{} anchor pixels in {:.4}–{:.4} cd/m², need {}",
            ratios.len(),
            used.0,
            used.1,
            min_pixels
        )));
    }
    let gain = stats::median(&mut ratios).expect("non-empty");
    Ok(AnchorGain { gain, anchor_pixel_count: ratios.len(), anchor_band: used, widened })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionLabel {
    Outside,
    Neutral,
    /// HDR closer to the EXR anchor.
    Recovery,
    /// HDR further from the EXR anchor.
    Adjustment,
}

impl DecisionLabel {
    pub fn classify(de_sdr: f64, de_hdr: f64, threshold: f64) -> Self {
        let d = de_hdr - de_sdr;
        if d == 0.0 || d.abs() < threshold {
            Self::Neutral
        } else if d < 0.0 {
            Self::Recovery
        } else {
            Self::Adjustment
        }
    }

    pub fn color(&self) -> [u8; 3] {
        match self {
            Self::Outside => [0, 0, 0],
            Self::Neutral => [128, 128, 128],
            Self::Recovery => [0, 255, 0],
            Self::Adjustment => [255, 0, 0],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionCounts {
    pub recovery: u64,
    pub adjustment: u64,
    pub neutral: u64,
}

impl DecisionCounts {
    pub fn add(&mut self, other: &Self) {
        self.recovery += other.recovery;
        self.adjustment += other.adjustment;
        self.neutral += other.neutral;
    }

    pub fn decided(&self) -> u64 {
        self.recovery + self.adjustment
    }

    pub fn total(&self) -> u64 {
        self.decided() + self.neutral
    }

    /// Recovery share among non-neutral pixels.
    pub fn recovery_ratio(&self) -> Option<f64> {
        (self.decided() > 0).then(|| self.recovery as f64 / self.decided() as f64)
    }

    pub fn adjustment_ratio(&self) -> Option<f64> {
        (self.decided() > 0).then(|| self.adjustment as f64 / self.decided() as f64)
    }

    pub fn neutral_fraction(&self) -> Option<f64> {
        (self.total() > 0).then(|| self.neutral as f64 / self.total() as f64)
    }
}

/// Per-pixel ΔE planes and labels for one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionMap {
    pub de_sdr: Plane<f64>,
    pub de_hdr: Plane<f64>,
    pub labels: Plane<DecisionLabel>,
    pub threshold: f64,
    pub area: ActiveArea,
    pub gain: f64,
}

impl DecisionMap {
    pub fn counts(&self) -> DecisionCounts {
        let mut c = DecisionCounts::default();
        for l in self.labels.data() {
            match l {
                DecisionLabel::Recovery => c.recovery += 1,
                DecisionLabel::Adjustment => c.adjustment += 1,
                DecisionLabel::Neutral => c.neutral += 1,
                DecisionLabel::Outside => {}
            }
        }
        c
    }
}

/// SDR and HDR masters in ICtCp after Bradford alignment to D65, the
/// white ICtCp is defined on.
pub fn master_ictcp(triplet: &FrameTriplet) -> Result<(codec::IctcpPlane, codec::IctcpPlane)> {
    let sdr = codec::rgb_to_xyz_native(&triplet.sdr)?;
    let hdr = codec::rgb_to_xyz_native(&triplet.hdr)?;
    let (sdr, hdr) = align_whitepoints(&sdr, &hdr, WhitePoint::D65)?;
    Ok((codec::xyz_to_ictcp(&sdr, 1.0), codec::xyz_to_ictcp(&hdr, 1.0)))
}

/// EXR → XYZ(D65) × gain → ICtCp.
pub fn exr_ictcp(triplet: &FrameTriplet, gain: &AnchorGain) -> Result<codec::IctcpPlane> {
    let xyz = codec::rgb_to_xyz(&triplet.exr)?;
    Ok(codec::xyz_to_ictcp(&xyz, gain.gain))
}

/// Labels pixels from precomputed ICtCp planes.
pub fn decision_map_from_ictcp(
    exr: &Plane<Ictcp>,
    sdr: &Plane<Ictcp>,
    hdr: &Plane<Ictcp>,
    area: &ActiveArea,
    threshold: f64,
    gain: f64,
) -> Result<DecisionMap> {
    if !(exr.same_shape(sdr) && sdr.same_shape(hdr)) {
        return Err(Error::Registration("ICtCp planes differ in size".into()));
    }
    if !(threshold >= 0.0) {
        return Err(Error::Config(format!("neutral threshold must be ≥ 0, got {threshold}")));
    }
    let (w, h) = (sdr.width(), sdr.height());
    let mut de_sdr = Plane::filled(w, h, 0.0);
    let mut de_hdr = Plane::filled(w, h, 0.0);
    let mut labels = Plane::filled(w, h, DecisionLabel::Outside);
    for i in area.indices(w) {
        let ds = delta_e_itp(&sdr.data()[i], &exr.data()[i]);
        let dh = delta_e_itp(&hdr.data()[i], &exr.data()[i]);
        de_sdr.data_mut()[i] = ds;
        de_hdr.data_mut()[i] = dh;
        labels.data_mut()[i] = DecisionLabel::classify(ds, dh, threshold);
    }
    Ok(DecisionMap { de_sdr, de_hdr, labels, threshold, area: *area, gain })
}

/// Full per-frame decision map from a triplet and an anchor gain.
pub fn decision_map(triplet: &FrameTriplet, gain: &AnchorGain, threshold: f64) -> Result<DecisionMap> {
    let exr = exr_ictcp(triplet, gain)?;
    let (sdr, hdr) = master_ictcp(triplet)?;
    decision_map_from_ictcp(&exr.pixels, &sdr.pixels, &hdr.pixels, &triplet.active, threshold, gain.gain)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneDecision {
    pub scene: SceneCategory,
    pub frames: usize,
    pub counts: DecisionCounts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionSummary {
    /// One row per scene present, in category order.
    pub scenes: Vec<SceneDecision>,
    /// Pixel-weighted pooling of every frame.
    pub full: DecisionCounts,
    pub frames: usize,
}

/// Pools per-frame label counts by scene and over the full set.
pub fn summarize_decisions<I>(frames: I) -> DecisionSummary
where
    I: IntoIterator<Item = (SceneCategory, DecisionCounts)>,
{
    let mut by_scene: BTreeMap<SceneCategory, (usize, DecisionCounts)> = BTreeMap::new();
    let mut full = DecisionCounts::default();
    let mut n = 0;
    for (scene, counts) in frames {
        let e = by_scene.entry(scene).or_default();
        e.0 += 1;
        e.1.add(&counts);
        full.add(&counts);
        n += 1;
    }
    DecisionSummary {
        scenes: by_scene
            .into_iter()
            .map(|(scene, (frames, counts))| SceneDecision { scene, frames, counts })
            .collect(),
        full,
        frames: n,
    }
}

/// Cross-domain gradient correlations on log-luminance planes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StructuralCorrelation {
    pub exr_hdr: Option<f64>,
    pub hdr_sdr: Option<f64>,
}

pub fn structural_correlation(triplet: &FrameTriplet, gain: &AnchorGain, area: &ActiveArea) -> Result<StructuralCorrelation> {
    let exr = log_plane(&triplet.exr_luma.map(|&y| y * gain.gain));
    let hdr = log_plane(&triplet.hdr_luma);
    let sdr = log_plane(&triplet.sdr_luma);
    Ok(StructuralCorrelation {
        exr_hdr: gradient_correlation(&exr, &hdr, area)?.map(|g| g.rho),
        hdr_sdr: gradient_correlation(&hdr, &sdr, area)?.map(|g| g.rho),
    })
}

/// Packed RGB8 rendering: green recovery, red adjustment, grey neutral,
/// black outside the active area.
pub fn render_decision(map: &DecisionMap) -> Vec<u8> {
    map.labels.data().iter().flat_map(|l| l.color()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ictcp(i: f64, ct: f64, cp: f64) -> Ictcp {
        Ictcp::new(i, ct, cp)
    }

    #[test]
    fn gain_from_constructed_proportionality() {
        let ls = Plane::from_fn(40, 40, |x, y| 0.5 + 0.3 * (x + 40 * y) as f64 / 40.0);
        let y = ls.map(|&v| v / 10.0);
        let g = compute_gain(&y, &ls, &ls.full_area(), (4.8, 9.6), 100).unwrap();
        assert!((g.gain - 10.0).abs() < 1e-12);
        assert!(!g.widened);
    }

    #[test]
    fn gain_ignores_pixels_outside_band_and_resists_outliers() {
        let ls = Plane::from_fn(50, 50, |x, y| 1.0 + 10.0 * ((x + 50 * y) as f64 / 2500.0));
        let mut y = ls.map(|&v| v / 4.0);
        let base = compute_gain(&y, &ls, &ls.full_area(), (4.8, 9.6), 100).unwrap();
        // Corrupt out-of-band pixels arbitrarily.
        for (i, v) in y.data_mut().iter_mut().enumerate() {
            let l = ls.data()[i];
            if !(4.8..=9.6).contains(&l) {
                *v = 123.0;
            }
        }
        let g = compute_gain(&y, &ls, &ls.full_area(), (4.8, 9.6), 100).unwrap();
        assert_eq!(g.gain, base.gain);
        // Corrupt every tenth in-band ratio by ×1000.
        let mut k = 0;
        for (i, v) in y.data_mut().iter_mut().enumerate() {
            if (4.8..=9.6).contains(&ls.data()[i]) {
                if k % 10 == 0 {
                    *v /= 1000.0;
                }
                k += 1;
            }
        }
        let g = compute_gain(&y, &ls, &ls.full_area(), (4.8, 9.6), 100).unwrap();
        assert!((g.gain - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gain_widens_then_fails() {
        let ls = Plane::from_fn(20, 20, |x, _| if x < 10 { 3.6 } else { 40.0 });
        let y = ls.map(|&v| v / 2.0);
        let g = compute_gain(&y, &ls, &ls.full_area(), (4.8, 9.6), 100).unwrap();
        assert!(g.widened);
        assert!(g.anchor_band.0 < 3.6);
        assert_eq!(g.gain, 2.0);
        let flat = Plane::filled(20, 20, 40.0);
        assert!(matches!(
            compute_gain(&flat.map(|v| v / 2.0), &flat, &flat.full_area(), (4.8, 9.6), 100),
            Err(Error::Anchoring(_))
        ));
    }

    #[test]
    fn classification_rule() {
        assert_eq!(DecisionLabel::classify(5.0, 5.0, 3.0), DecisionLabel::Neutral);
        assert_eq!(DecisionLabel::classify(5.0, 5.0, 0.0), DecisionLabel::Neutral);
        assert_eq!(DecisionLabel::classify(5.0, 4.999, 0.0), DecisionLabel::Recovery);
        assert_eq!(DecisionLabel::classify(5.0, 2.5, 3.0), DecisionLabel::Neutral);
        assert_eq!(DecisionLabel::classify(5.0, 1.0, 3.0), DecisionLabel::Recovery);
        assert_eq!(DecisionLabel::classify(1.0, 5.0, 3.0), DecisionLabel::Adjustment);
    }

    #[test]
    fn map_labels_and_render() {
        let exr = Plane::filled(4, 4, ictcp(0.4, 0.0, 0.0));
        let hdr = exr.clone();
        let sdr = Plane::filled(4, 4, ictcp(0.4, 0.02, 0.0));
        let area = ActiveArea::new(1, 1, 4, 4);
        let m = decision_map_from_ictcp(&exr, &sdr, &hdr, &area, DEFAULT_THRESHOLD, 1.0).unwrap();
        let c = m.counts();
        assert_eq!(c, DecisionCounts { recovery: 9, adjustment: 0, neutral: 0 });
        let rgb = render_decision(&m);
        assert_eq!(&rgb[0..3], &[0, 0, 0]);
        let green = rgb.chunks(3).filter(|p| *p == [0, 255, 0]).count();
        assert_eq!(green as u64, c.recovery);
        let swapped = decision_map_from_ictcp(&exr, &hdr, &sdr, &area, DEFAULT_THRESHOLD, 1.0).unwrap();
        assert_eq!(swapped.counts().adjustment, 9);
    }

    #[test]
    fn summary_weighting_and_order() {
        let a = DecisionCounts { recovery: 100, adjustment: 0, neutral: 5 };
        let b = DecisionCounts { recovery: 0, adjustment: 100, neutral: 0 };
        let s1 = summarize_decisions([(SceneCategory::Cave, a), (SceneCategory::Smoke, b)]);
        let s2 = summarize_decisions([(SceneCategory::Smoke, b), (SceneCategory::Cave, a)]);
        assert_eq!(s1, s2);
        assert_eq!(s1.full.recovery_ratio(), Some(0.5));
        assert_eq!(s1.scenes[0].counts.recovery_ratio(), Some(1.0));
        let r = s1.full.recovery_ratio().unwrap() + s1.full.adjustment_ratio().unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }
}
