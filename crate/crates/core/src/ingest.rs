//! Shot manifests, stratified frame sampling, letterbox detection and the
//! decode of raw master codes into co-registered frame triplets.
//!
//! Reading files is the job of the `hdrtriad` crate; this module starts
//! from in-memory code planes.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{self, transfer, LinearRgbPlane, Primaries, Referred, WhitePoint};
use crate::plane::{ActiveArea, Plane};
use crate::{Error, Result};

/// Scene taxonomy used for stratified sampling and per-scene tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SceneCategory {
    #[serde(rename = "Day Car Interior")]
    DayCarInterior,
    #[serde(rename = "Night Car Interior")]
    NightCarInterior,
    #[serde(rename = "Cave")]
    Cave,
    #[serde(rename = "Desert")]
    Desert,
    #[serde(rename = "Hybrid VFX")]
    HybridVfx,
    #[serde(rename = "Night Interior")]
    NightInterior,
    #[serde(rename = "Smoke")]
    Smoke,
    #[serde(rename = "Other")]
    Other,
}

impl SceneCategory {
    pub const ALL: [SceneCategory; 8] = [
        Self::DayCarInterior,
        Self::NightCarInterior,
        Self::Cave,
        Self::Desert,
        Self::HybridVfx,
        Self::NightInterior,
        Self::Smoke,
        Self::Other,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::DayCarInterior => "Day Car Interior",
            Self::NightCarInterior => "Night Car Interior",
            Self::Cave => "Cave",
            Self::Desert => "Desert",
            Self::HybridVfx => "Hybrid VFX",
            Self::NightInterior => "Night Interior",
            Self::Smoke => "Smoke",
            Self::Other => "Other",
        }
    }
}

impl fmt::Display for SceneCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Master transfer function tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transfer {
    Gamma26,
    Pq,
}

/// How integer container codes map to the normalised [0, 1] signal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeRange {
    /// code / (2^bits − 1) of the container.
    #[default]
    Full,
    /// 12-bit codes stored in a 16-bit container, normalised as code / 4095.
    TwelveInSixteen,
}

/// Inclusive frame index range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRange {
    pub start: u32,
    pub end: u32,
}

impl FrameRange {
    pub fn len(&self) -> usize {
        (self.end - self.start) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, frame: u32) -> bool {
        (self.start..=self.end).contains(&frame)
    }
}

/// Dimensions for headerless planar float dumps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDims {
    pub width: usize,
    pub height: usize,
}

fn default_sdr_transfer() -> Transfer {
    Transfer::Gamma26
}
fn default_hdr_transfer() -> Transfer {
    Transfer::Pq
}
fn default_sdr_peak() -> f64 {
    transfer::SDR_CINEMA_PEAK
}
fn default_hdr_peak() -> f64 {
    transfer::HDR_CINEMA_PEAK
}
fn default_white() -> [f64; 2] {
    [WhitePoint::D65.x, WhitePoint::D65.y]
}

/// One shot: its scene category, frames and file path templates.
///
/// Templates use `{frame}` or a zero-padded `{frame:05}` placeholder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotSpec {
    pub id: String,
    pub scene: SceneCategory,
    /// Inclusive `[start, end]` pairs.
    pub frames: Vec<[u32; 2]>,
    pub exr: Option<String>,
    pub sdr: String,
    pub hdr: String,
    #[serde(default = "default_sdr_transfer")]
    pub sdr_transfer: Transfer,
    #[serde(default = "default_hdr_transfer")]
    pub hdr_transfer: Transfer,
    #[serde(default = "default_sdr_peak")]
    pub sdr_peak: f64,
    #[serde(default = "default_hdr_peak")]
    pub hdr_peak: f64,
    /// Master encoding white (xy).
    #[serde(default = "default_white")]
    pub white: [f64; 2],
    #[serde(default)]
    pub code_range: CodeRange,
    #[serde(default)]
    pub raw: Option<RawDims>,
}

impl ShotSpec {
    pub fn ranges(&self) -> Vec<FrameRange> {
        self.frames.iter().map(|&[start, end]| FrameRange { start, end }).collect()
    }

    /// All frame indices in ascending order.
    pub fn frame_indices(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self.ranges().iter().flat_map(|r| r.start..=r.end).collect();
        out.sort_unstable();
        out
    }

    pub fn contains_frame(&self, frame: u32) -> bool {
        self.ranges().iter().any(|r| r.contains(frame))
    }

    pub fn white_point(&self) -> Result<WhitePoint> {
        WhitePoint::new(self.white[0], self.white[1])
    }

    pub fn sdr_master(&self) -> Result<MasterSpec> {
        Ok(MasterSpec { transfer: self.sdr_transfer, peak: self.sdr_peak, white: self.white_point()? })
    }

    pub fn hdr_master(&self) -> Result<MasterSpec> {
        Ok(MasterSpec { transfer: self.hdr_transfer, peak: self.hdr_peak, white: self.white_point()? })
    }
}

/// Render a path template for one frame.
pub fn render_template(template: &str, frame: u32) -> String {
    let mut out = String::with_capacity(template.len() + 8);
    let mut rest = template;
    while let Some(pos) = rest.find("{frame") {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos + 6..];
        let Some(close) = tail.find('}') else {
            out.push_str(&rest[pos..]);
            return out;
        };
        let spec = &tail[..close];
        match spec.strip_prefix(':').map(|w| w.trim_start_matches('0').parse::<usize>()) {
            None if spec.is_empty() => out.push_str(&frame.to_string()),
            Some(Ok(width)) => out.push_str(&format!("{frame:0width$}")),
            _ => out.push_str(&rest[pos..pos + 6 + close + 1]),
        }
        rest = &tail[close + 1..];
    }
    out.push_str(rest);
    out
}

fn default_frames_per_shot() -> usize {
    1
}

/// Seeded sampling plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_frames_per_shot")]
    pub frames_per_shot: usize,
    /// When set, sample this many frames per scene category instead.
    #[serde(default)]
    pub per_category: Option<usize>,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { seed: 0, frames_per_shot: 1, per_category: None }
    }
}

/// Corpus description: shots plus the sampling plan.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotManifest {
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub shots: Vec<ShotSpec>,
}

impl ShotManifest {
    /// Structural validation (file existence is checked by the loader).
    pub fn validate(&self) -> Result<()> {
        if self.shots.is_empty() {
            return Err(Error::Config("manifest lists no shots".into()));
        }
        let mut ids = BTreeSet::new();
        for shot in &self.shots {
            if !ids.insert(shot.id.as_str()) {
                return Err(Error::Config(format!("duplicate shot id {}", shot.id)));
            }
            if shot.frames.is_empty() {
                return Err(Error::Config(format!("shot {} has no frames", shot.id)));
            }
            let mut ranges = shot.ranges();
            if let Some(r) = ranges.iter().find(|r| r.start > r.end) {
                return Err(Error::Config(format!("shot {}: frame range {}..{} is reversed", shot.id, r.start, r.end)));
            }
            ranges.sort_by_key(|r| r.start);
            for pair in ranges.windows(2) {
                if pair[1].start <= pair[0].end {
                    return Err(Error::Config(format!("shot {}: overlapping frame ranges", shot.id)));
                }
            }
            shot.white_point()?;
            for (name, peak) in [("sdr_peak", shot.sdr_peak), ("hdr_peak", shot.hdr_peak)] {
                if !(peak > 0.0 && peak.is_finite()) {
                    return Err(Error::Config(format!("shot {}: {name} must be positive", shot.id)));
                }
            }
        }
        Ok(())
    }

    pub fn shot(&self, id: &str) -> Option<&ShotSpec> {
        self.shots.iter().find(|s| s.id == id)
    }

    /// Every listed frame, shots in manifest order.
    pub fn all_frames(&self) -> Vec<FrameKey> {
        self.shots
            .iter()
            .flat_map(|s| s.frame_indices().into_iter().map(move |f| FrameKey { shot: s.id.clone(), frame: f }))
            .collect()
    }
}

/// Identifies one frame of one shot.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FrameKey {
    pub shot: String,
    pub frame: u32,
}

/// How many frames to draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quota {
    PerShot(usize),
    PerCategory(usize),
}

impl Quota {
    pub fn from_sampling(s: &Sampling) -> Self {
        match s.per_category {
            Some(q) => Quota::PerCategory(q),
            None => Quota::PerShot(s.frames_per_shot),
        }
    }
}

/// Seeded stratified sampling without replacement.
///
/// `PerShot(n)` draws `n` frames uniformly from every shot (all frames when
/// the shot is shorter). `PerCategory(q)` pools the frames of all shots in
/// each scene category and draws `q` of them. Output is ordered by manifest
/// shot order, then frame index.
pub fn sample_frames(manifest: &ShotManifest, quota: Quota, seed: u64) -> Result<Vec<FrameKey>> {
    if manifest.shots.is_empty() {
        return Err(Error::Config("manifest lists no shots".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<(usize, u32)> = Vec::new();
    match quota {
        Quota::PerShot(0) | Quota::PerCategory(0) => {
            return Err(Error::Config("sampling quota must be at least 1".into()))
        }
        Quota::PerShot(n) => {
            for (si, shot) in manifest.shots.iter().enumerate() {
                let frames = shot.frame_indices();
                let chosen = rand::seq::index::sample(&mut rng, frames.len(), n.min(frames.len()));
                picked.extend(chosen.into_iter().map(|i| (si, frames[i])));
            }
        }
        Quota::PerCategory(q) => {
            for cat in SceneCategory::ALL {
                let pool: Vec<(usize, u32)> = manifest
                    .shots
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.scene == cat)
                    .flat_map(|(si, s)| s.frame_indices().into_iter().map(move |f| (si, f)))
                    .collect();
                if pool.is_empty() {
                    continue;
                }
                let chosen = rand::seq::index::sample(&mut rng, pool.len(), q.min(pool.len()));
                picked.extend(chosen.into_iter().map(|i| pool[i]));
            }
        }
    }
    picked.sort_unstable();
    picked.dedup();
    Ok(picked
        .into_iter()
        .map(|(si, frame)| FrameKey { shot: manifest.shots[si].id.clone(), frame })
        .collect())
}

/// Fraction of the source peak below which a whole border row or column is
/// treated as letterbox matte.
pub const LETTERBOX_FRACTION: f64 = 0.001;

/// Largest rectangle left after trimming border rows and columns whose
/// maximum luminance is below `threshold`.
pub fn detect_active_area(luma: &Plane<f64>, threshold: f64) -> ActiveArea {
    let (w, h) = (luma.width(), luma.height());
    let row_max = |y: usize, x0: usize, x1: usize| (x0..x1).map(|x| *luma.get(x, y)).fold(f64::NEG_INFINITY, f64::max);
    let bright_row = |y: usize| row_max(y, 0, w) >= threshold;
    let Some(y0) = (0..h).find(|&y| bright_row(y)) else {
        return ActiveArea::EMPTY;
    };
    let y1 = (0..h).rev().find(|&y| bright_row(y)).map_or(y0, |y| y + 1);
    let bright_col = |x: usize| (y0..y1).any(|y| *luma.get(x, y) >= threshold);
    let Some(x0) = (0..w).find(|&x| bright_col(x)) else {
        return ActiveArea::EMPTY;
    };
    let x1 = (0..w).rev().find(|&x| bright_col(x)).map_or(x0, |x| x + 1);
    ActiveArea::new(x0, y0, x1, y1)
}

/// Decode settings for one master.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MasterSpec {
    pub transfer: Transfer,
    pub peak: f64,
    pub white: WhitePoint,
}

impl MasterSpec {
    pub fn sdr_cinema() -> Self {
        Self { transfer: Transfer::Gamma26, peak: transfer::SDR_CINEMA_PEAK, white: WhitePoint::D65 }
    }

    pub fn hdr_cinema() -> Self {
        Self { transfer: Transfer::Pq, peak: transfer::HDR_CINEMA_PEAK, white: WhitePoint::D65 }
    }

    /// Normalised code to cd/m².
    pub fn decode(&self, code: f64) -> Result<f64> {
        match self.transfer {
            Transfer::Gamma26 => codec::gamma26_decode(code, self.peak),
            Transfer::Pq => codec::pq_eotf(code),
        }
    }

    /// cd/m² to normalised code (used by writers).
    pub fn encode(&self, nits: f64) -> Result<f64> {
        match self.transfer {
            Transfer::Gamma26 => codec::gamma26_encode(nits, self.peak),
            Transfer::Pq => codec::pq_inverse_eotf(nits),
        }
    }
}

/// Per-frame sanitisation and clamp counters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    /// Non-finite EXR samples replaced by 0.
    pub nonfinite_exr: usize,
    /// Master codes outside [0, 1] (or non-finite) clamped before decode.
    pub clamped_codes: usize,
    /// HDR pixels whose luminance exceeds the mastering ceiling.
    pub hdr_above_ceiling: usize,
    pub warnings: Vec<String>,
}

/// Co-registered EXR / SDR / HDR planes for one frame.
#[derive(Clone, Debug)]
pub struct FrameTriplet {
    pub frame_index: u32,
    /// Scene-referred ACES AP0 linear.
    pub exr: LinearRgbPlane,
    /// Display-referred, cd/m².
    pub sdr: LinearRgbPlane,
    /// Display-referred, cd/m².
    pub hdr: LinearRgbPlane,
    pub active: ActiveArea,
    /// L_S, cd/m².
    pub sdr_luma: Plane<f64>,
    /// L_H, cd/m².
    pub hdr_luma: Plane<f64>,
    /// Relative scene luminance of the EXR.
    pub exr_luma: Plane<f64>,
    /// False when built from masters alone.
    pub has_exr: bool,
    pub diagnostics: FrameDiagnostics,
}

impl FrameTriplet {
    pub fn width(&self) -> usize {
        self.sdr_luma.width()
    }

    pub fn height(&self) -> usize {
        self.sdr_luma.height()
    }
}

const LATTICE: f64 = 65535.0;

fn decode_master(codes: &Plane<[f64; 3]>, spec: &MasterSpec, clamped: &mut usize) -> Result<LinearRgbPlane> {
    spec.white.validate()?;
    // Large frames of 16-bit codes decode through a table; each entry is
    // the exact decode of `k / 65535`, so results are bit-identical.
    let lut: Option<Vec<f64>> = if codes.len() * 3 > 1 << 16 {
        Some((0..=LATTICE as usize).map(|k| spec.decode(k as f64 / LATTICE)).collect::<Result<_>>()?)
    } else {
        None
    };
    let mut err = None;
    let samples = codes.map(|rgb| {
        rgb.map(|c| {
            let v = if c.is_finite() { c.clamp(0.0, 1.0) } else { 0.0 };
            if v != c {
                *clamped += 1;
            }
            if let Some(lut) = &lut {
                let k = libm::round(v * LATTICE);
                if k / LATTICE == v {
                    return lut[k as usize];
                }
            }
            spec.decode(v).unwrap_or_else(|e| {
                err = Some(e);
                0.0
            })
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(LinearRgbPlane::new(Primaries::P3D65, spec.white, Referred::Display, samples))
}

/// Decodes normalised master codes and the AP0 EXR plane into a triplet,
/// computing luminance planes and the intersected active area.
pub fn build_triplet(
    frame_index: u32,
    exr_rgb: Plane<[f64; 3]>,
    sdr_codes: &Plane<[f64; 3]>,
    hdr_codes: &Plane<[f64; 3]>,
    sdr: &MasterSpec,
    hdr: &MasterSpec,
) -> Result<FrameTriplet> {
    build(frame_index, Some(exr_rgb), sdr_codes, hdr_codes, sdr, hdr)
}

/// Like [`build_triplet`] for shots without a scene-referred source. The
/// EXR plane is zero, takes no part in active-area detection, and
/// `has_exr` is false so anchored analyses refuse the frame.
pub fn build_master_triplet(
    frame_index: u32,
    sdr_codes: &Plane<[f64; 3]>,
    hdr_codes: &Plane<[f64; 3]>,
    sdr: &MasterSpec,
    hdr: &MasterSpec,
) -> Result<FrameTriplet> {
    build(frame_index, None, sdr_codes, hdr_codes, sdr, hdr)
}

fn build(
    frame_index: u32,
    exr_rgb: Option<Plane<[f64; 3]>>,
    sdr_codes: &Plane<[f64; 3]>,
    hdr_codes: &Plane<[f64; 3]>,
    sdr: &MasterSpec,
    hdr: &MasterSpec,
) -> Result<FrameTriplet> {
    let has_exr = exr_rgb.is_some();
    let exr_rgb = exr_rgb.unwrap_or_else(|| Plane::filled(sdr_codes.width(), sdr_codes.height(), [0.0; 3]));
    if !exr_rgb.same_shape(sdr_codes) || !sdr_codes.same_shape(hdr_codes) {
        return Err(Error::Registration(format!(
            "dimension mismatch: exr {}x{}, sdr {}x{}, hdr {}x{}",
            exr_rgb.width(),
            exr_rgb.height(),
            sdr_codes.width(),
            sdr_codes.height(),
            hdr_codes.width(),
            hdr_codes.height()
        )));
    }
    let mut diagnostics = FrameDiagnostics::default();
    let mut exr_rgb = exr_rgb;
    for v in exr_rgb.data_mut().iter_mut().flatten() {
        if !v.is_finite() {
            *v = 0.0;
            diagnostics.nonfinite_exr += 1;
        }
    }
    let exr = LinearRgbPlane::new(Primaries::AcesAp0, WhitePoint::ACES, Referred::Scene, exr_rgb);
    let sdr_plane = decode_master(sdr_codes, sdr, &mut diagnostics.clamped_codes)?;
    let hdr_plane = decode_master(hdr_codes, hdr, &mut diagnostics.clamped_codes)?;

    let exr_luma = codec::luminance(&exr)?;
    let sdr_luma = codec::luminance(&sdr_plane)?.map(|&v| v.max(0.0));
    let hdr_luma = codec::luminance(&hdr_plane)?.map(|&v| v.max(0.0));
    diagnostics.hdr_above_ceiling = hdr_luma.data().iter().filter(|&&v| v > hdr.peak * (1.0 + 1e-9)).count();

    let exr_peak = exr_luma.data().iter().copied().fold(0.0, f64::max);
    let area_exr = if !has_exr {
        ActiveArea::full(exr_luma.width(), exr_luma.height())
    } else if exr_peak > 0.0 {
        detect_active_area(&exr_luma, LETTERBOX_FRACTION * exr_peak)
    } else {
        ActiveArea::EMPTY
    };
    let area_sdr = detect_active_area(&sdr_luma, LETTERBOX_FRACTION * sdr.peak);
    let area_hdr = detect_active_area(&hdr_luma, LETTERBOX_FRACTION * hdr.peak);
    let active = area_exr.intersect(&area_sdr).intersect(&area_hdr);
    if active.is_empty() {
        diagnostics.warnings.push("no active area".into());
    }
    if diagnostics.nonfinite_exr > 0 {
        diagnostics.warnings.push(format!("{} non-finite EXR samples zeroed", diagnostics.nonfinite_exr));
    }
    Ok(FrameTriplet {
        frame_index,
        exr,
        sdr: sdr_plane,
        hdr: hdr_plane,
        active,
        sdr_luma,
        hdr_luma,
        exr_luma,
        has_exr,
        diagnostics,
    })
}
