//! Synthetic EXR/SDR/HDR triplets rendered through known tone curves, with
//! controlled injections, plus the ground truth every analyzer statistic
//! can be checked against.
//!
//! The generator only uses the forward curves and colour conversions; it
//! shares no fitting code with the analyzer.

pub mod curve;
pub mod verify;

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codec::colorimetry::{invert, mul_vec, rgb_to_xyz_d65_matrix};
use crate::codec::{self, hue_diff, Ictcp, IctcpEncoder, Mat3, Primaries, WhitePoint};
use crate::decision::DecisionLabel;
use crate::ingest::MasterSpec;
use crate::lumamap::ResidualType;
use crate::plane::{ActiveArea, Plane};
use crate::{Error, Result};

pub use curve::ToneCurve;
pub use verify::{verify, Check, FrameObservation, Tolerances, VerifyReport};

/// Quantisation of the generated master codes.
pub const CODE_LEVELS: f64 = 65535.0;

const SDR_PEAK: f64 = codec::transfer::SDR_CINEMA_PEAK;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SceneKind {
    /// Horizontal log-luminance ramp with tinted bands.
    Ramp,
    /// Smooth multi-scale luminance texture with a drifting hue field.
    Textured,
    /// Coloured Gaussian blobs over a dim gradient.
    Blobs,
    /// Two flat neutral patches, like a title card.
    Titlecard,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectionKind {
    /// Flat-topped luminance plateau (cd/m²) with 4-pixel soft edges.
    HighlightClip,
    /// 2-pixel checker adding 0 or `magnitude` cd/m².
    TextureResidual,
    /// Sets the target's ICtCp hue to the other master's hue plus
    /// `magnitude` degrees, keeping its own I and C.
    HueRotate,
    /// Multiplies the target's ICtCp chroma by `magnitude`.
    ChromaScale,
    /// Additive neutral Gaussian noise with σ = `magnitude` cd/m².
    Noise,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Sdr,
    #[default]
    Hdr,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Injection {
    pub kind: InjectionKind,
    /// Whole frame when absent.
    #[serde(default)]
    pub region: Option<ActiveArea>,
    pub magnitude: f64,
    #[serde(default)]
    pub target: Target,
}

fn default_sdr_curve() -> ToneCurve {
    ToneCurve::sdr_default()
}

fn default_hdr_curve() -> ToneCurve {
    ToneCurve::hdr_default()
}

fn default_tint() -> f64 {
    0.3
}

fn default_exposure() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub scene: SceneKind,
    #[serde(default = "default_sdr_curve")]
    pub sdr_curve: ToneCurve,
    #[serde(default = "default_hdr_curve")]
    pub hdr_curve: ToneCurve,
    #[serde(default)]
    pub injections: Vec<Injection>,
    #[serde(default)]
    pub seed: u64,
    /// Saturation of scene tints, 0 = neutral.
    #[serde(default = "default_tint")]
    pub tint: f64,
    /// Multiplier on scene luminance.
    #[serde(default = "default_exposure")]
    pub exposure: f64,
}

impl SynthSpec {
    pub fn new(width: usize, height: usize, scene: SceneKind, seed: u64) -> Self {
        Self {
            width,
            height,
            scene,
            sdr_curve: ToneCurve::sdr_default(),
            hdr_curve: ToneCurve::hdr_default(),
            injections: Vec::new(),
            seed,
            tint: default_tint(),
            exposure: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 4 || self.height < 4 {
            return Err(Error::Config(format!("synthetic frame {}x{} is too small", self.width, self.height)));
        }
        self.sdr_curve.validate()?;
        self.hdr_curve.validate()?;
        if !(0.0..1.0).contains(&self.tint) || !(self.exposure > 0.0 && self.exposure.is_finite()) {
            return Err(Error::Config("tint must be in [0, 1) and exposure positive".into()));
        }
        for inj in &self.injections {
            if let Some(r) = inj.region {
                if r.is_empty() || !r.fits(self.width, self.height) {
                    return Err(Error::Config(format!("injection region {r:?} outside frame")));
                }
            }
            let ok = match inj.kind {
                InjectionKind::ChromaScale => inj.magnitude > 0.0,
                InjectionKind::Noise => inj.magnitude >= 0.0,
                _ => true,
            };
            if !ok || !inj.magnitude.is_finite() {
                return Err(Error::Config(format!("invalid magnitude for {:?}", inj.kind)));
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the spec's canonical debug rendering.
    pub fn spec_hash(&self) -> String {
        let digest = Sha256::digest(format!("{self:?}").as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The same spec with a per-frame seed.
    pub fn for_frame(&self, frame: u32) -> Self {
        let mut s = self.clone();
        s.seed = self.seed ^ (u64::from(frame).wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        s
    }

    fn region(&self, inj: &Injection) -> ActiveArea {
        inj.region.unwrap_or(ActiveArea::full(self.width, self.height))
    }

    /// Whether decision labels have a construction-time answer: both
    /// masters render the EXR through the same pure gain.
    pub fn faithful_rendering(&self) -> bool {
        self.sdr_curve.is_linear() && self.hdr_curve.is_linear() && self.sdr_curve.gain == self.hdr_curve.gain
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionTruth {
    pub region: ActiveArea,
    pub target: Target,
    /// Expected region mean |Δh| (degrees) or chroma ratio target/other.
    pub expected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec_hash: String,
    /// `(L_S, L_H)` samples of h = hdr_curve ∘ sdr_curve⁻¹, ascending.
    pub mapping: Vec<[f64; 2]>,
    /// Injected luminance residual: change in L_H minus the change h
    /// predicts from the change in L_S.
    pub injected_dl: Plane<f64>,
    /// Per-pixel expected decision label (neutral where nothing was
    /// perturbed); only for faithful renderings.
    pub expected_labels: Option<Plane<DecisionLabel>>,
    pub expected_type: ResidualType,
    pub hue_regions: Vec<RegionTruth>,
    pub chroma_regions: Vec<RegionTruth>,
    pub injection_free: bool,
}

impl GroundTruth {
    /// h(L_S), interpolated linearly in log10(L_S); `None` outside the
    /// sampled range.
    pub fn composed(&self, sdr_nits: f64) -> Option<f64> {
        let m = &self.mapping;
        if m.is_empty() || !(sdr_nits >= m[0][0] && sdr_nits <= m[m.len() - 1][0]) {
            return None;
        }
        let k = m.partition_point(|p| p[0] < sdr_nits);
        if k == 0 {
            return Some(m[0][1]);
        }
        let (a, b) = (m[k - 1], m[k]);
        if b[0] <= a[0] {
            return Some(b[1]);
        }
        let t = (libm::log10(sdr_nits) - libm::log10(a[0])) / (libm::log10(b[0]) - libm::log10(a[0]));
        Some(a[1] + t * (b[1] - a[1]))
    }
}

/// One generated frame: AP0 EXR samples (f32-representable), normalised
/// 16-bit master codes (Gamma 2.6 / 48 cd/m² and PQ), and its truth.
#[derive(Clone, Debug)]
pub struct SynthFrame {
    pub exr: Plane<[f64; 3]>,
    pub sdr_codes: Plane<[f64; 3]>,
    pub hdr_codes: Plane<[f64; 3]>,
    pub truth: GroundTruth,
}

struct Conversions {
    p3_to_xyz: Mat3,
    xyz_to_p3: Mat3,
    ap0_to_xyz: Mat3,
    xyz_to_ap0: Mat3,
}

impl Conversions {
    fn new() -> Result<Self> {
        let p3_to_xyz = rgb_to_xyz_d65_matrix(Primaries::P3D65, WhitePoint::D65)?;
        let ap0_to_xyz = rgb_to_xyz_d65_matrix(Primaries::AcesAp0, WhitePoint::ACES)?;
        let inv = |m: &Mat3| invert(m).ok_or_else(|| Error::Config("singular colour matrix".into()));
        Ok(Self { xyz_to_p3: inv(&p3_to_xyz)?, xyz_to_ap0: inv(&ap0_to_xyz)?, p3_to_xyz, ap0_to_xyz })
    }

    fn p3_luma(&self, rgb: &[f64; 3]) -> f64 {
        let r = self.p3_to_xyz[1];
        r[0] * rgb[0] + r[1] * rgb[1] + r[2] * rgb[2]
    }
}

/// P3 colour of unit luminance at hue angle `theta` (radians), blended
/// with neutral by `saturation`.
fn tint(conv: &Conversions, theta: f64, saturation: f64) -> [f64; 3] {
    let wheel = [
        0.5 + 0.5 * libm::cos(theta),
        0.5 + 0.5 * libm::cos(theta - TAU / 3.0),
        0.5 + 0.5 * libm::cos(theta + TAU / 3.0),
    ];
    let mix = wheel.map(|c| (1.0 - saturation) + saturation * c);
    let y = conv.p3_luma(&mix);
    mix.map(|c| c / y)
}

fn scale(v: [f64; 3], k: f64) -> [f64; 3] {
    v.map(|c| c * k)
}

/// Scene-linear P3 (relative) radiance for the spec's scene kind.
fn render_scene(spec: &SynthSpec, conv: &Conversions, rng: &mut ChaCha8Rng) -> Plane<[f64; 3]> {
    let (w, h) = (spec.width, spec.height);
    let s = spec.tint;
    let neutral = [1.0, 1.0, 1.0];
    let fx = |x: usize| x as f64 / (w - 1) as f64;
    let fy = |y: usize| y as f64 / (h - 1) as f64;
    match spec.scene {
        SceneKind::Ramp => {
            let bands: Vec<[f64; 3]> = [None, Some(0.3), Some(3.6), Some(2.2)]
                .iter()
                .map(|t| t.map_or(neutral, |a| tint(conv, a, s)))
                .collect();
            Plane::from_fn(w, h, |x, y| {
                let lum = libm::pow(10.0, -2.0 + 2.6 * fx(x));
                let band = ((fy(y) * 4.0) as usize).min(3);
                scale(bands[band], lum)
            })
        }
        SceneKind::Textured => {
            let ph: [f64; 4] = [rng.random(), rng.random(), rng.random(), rng.random()];
            let f1 = 1.0 + 2.0 * rng.random::<f64>();
            let f2 = 1.0 + 2.0 * rng.random::<f64>();
            Plane::from_fn(w, h, |x, y| {
                let (u, v) = (fx(x), fy(y));
                let coarse = 0.9 * libm::sin(TAU * (f1 * u + ph[0])) * libm::cos(TAU * (f2 * v + ph[1]));
                let diag = 0.5 * libm::sin(TAU * (1.3 * (u + v) + ph[2]));
                let fine = 0.15 * libm::sin(TAU * 37.0 * u) * libm::sin(TAU * 29.0 * v);
                let lum = libm::pow(10.0, -1.0 + coarse + diag + fine);
                scale(tint(conv, TAU * (0.5 * u + 0.3 * v + ph[3]), s), lum)
            })
        }
        SceneKind::Blobs => {
            let side = w.min(h) as f64;
            let blobs: Vec<(f64, f64, f64, f64, [f64; 3])> = (0..6)
                .map(|_| {
                    let cx = rng.random::<f64>() * w as f64;
                    let cy = rng.random::<f64>() * h as f64;
                    let r = (0.05 + 0.1 * rng.random::<f64>()) * side;
                    let peak = libm::pow(10.0, -0.8 + 1.0 * rng.random::<f64>());
                    let c = tint(conv, TAU * rng.random::<f64>(), (2.0 * s).min(0.9));
                    (cx, cy, r, peak, c)
                })
                .collect();
            Plane::from_fn(w, h, |x, y| {
                let bg = libm::pow(10.0, -1.7 + 0.4 * fx(x));
                let mut rgb = scale(neutral, bg);
                for &(cx, cy, r, peak, c) in &blobs {
                    let d2 = (x as f64 - cx) * (x as f64 - cx) + (y as f64 - cy) * (y as f64 - cy);
                    let g = peak * libm::exp(-d2 / (2.0 * r * r));
                    for k in 0..3 {
                        rgb[k] += g * c[k];
                    }
                }
                rgb
            })
        }
        SceneKind::Titlecard => Plane::from_fn(w, h, |x, y| {
            let inside = x >= w / 4 && x < 3 * w / 4 && y >= 2 * h / 5 && y < 3 * h / 5;
            scale(neutral, if inside { 1.0 } else { 0.01 })
        }),
    }
}

/// Chromaticity-preserving rendering of D65 XYZ through a tone curve,
/// returned as P3 cd/m². Colours whose channels would exceed
/// `channel_limit` are desaturated towards neutral at equal luminance.
fn render_master(xyz: &Plane<[f64; 3]>, curve: &ToneCurve, channel_limit: f64, conv: &Conversions) -> Plane<[f64; 3]> {
    let white = WhitePoint::D65.xyz();
    xyz.map(|v| {
        let y = v[1];
        let lum = curve.apply(y);
        let out = if y > 0.0 { scale(*v, lum / y) } else { scale(white, lum) };
        let rgb = mul_vec(&conv.xyz_to_p3, out).map(|c| c.max(0.0));
        let peak = rgb.iter().copied().fold(0.0, f64::max);
        if peak <= channel_limit || lum >= channel_limit {
            return rgb;
        }
        let t = (channel_limit - lum) / (peak - lum);
        rgb.map(|c| lum + t * (c - lum))
    })
}

fn plateau_weight(r: &ActiveArea, x: usize, y: usize) -> f64 {
    let d = (x - r.x0 + 1).min(r.x1 - x).min(y - r.y0 + 1).min(r.y1 - y);
    (d as f64 / 4.0).min(1.0)
}

fn add_neutral(rgb: &mut [f64; 3], nits: f64) {
    for c in rgb.iter_mut() {
        *c = (*c + nits).max(0.0);
    }
}

fn apply_injection(
    inj: &Injection,
    region: ActiveArea,
    sdr: &mut Plane<[f64; 3]>,
    hdr: &mut Plane<[f64; 3]>,
    conv: &Conversions,
    enc: &IctcpEncoder,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let (target, other) = match inj.target {
        Target::Sdr => (sdr, &*hdr),
        Target::Hdr => (hdr, &*sdr),
    };
    let m = inj.magnitude;
    let noise = match inj.kind {
        InjectionKind::Noise => Some(Normal::new(0.0, m).map_err(|e| Error::Config(format!("noise: {e}")))?),
        _ => None,
    };
    let to_ictcp = |rgb: &[f64; 3]| enc.encode(mul_vec(&conv.p3_to_xyz, *rgb), 1.0).0;
    let from_ictcp = |v: &Ictcp| mul_vec(&conv.xyz_to_p3, enc.decode(v)).map(|c| c.max(0.0));
    for (x, y) in region.coords() {
        let reference = *other.get(x, y);
        let px = target.get_mut(x, y);
        match inj.kind {
            InjectionKind::HighlightClip => add_neutral(px, m * plateau_weight(&region, x, y)),
            InjectionKind::TextureResidual => {
                if (x / 2 + y / 2) % 2 == 1 {
                    add_neutral(px, m);
                }
            }
            InjectionKind::Noise => {
                let n = noise.as_ref().expect("noise distribution").sample(rng);
                add_neutral(px, n);
            }
            InjectionKind::HueRotate => {
                let own = to_ictcp(px);
                let hue = (to_ictcp(&reference).h + m).to_radians();
                *px = from_ictcp(&Ictcp::new(own.i, own.c * libm::cos(hue), own.c * libm::sin(hue)));
            }
            InjectionKind::ChromaScale => {
                let own = to_ictcp(px);
                *px = from_ictcp(&Ictcp::new(own.i, own.ct * m, own.cp * m));
            }
        }
    }
    Ok(())
}

fn quantize(code: f64) -> f64 {
    libm::round(code.clamp(0.0, 1.0) * CODE_LEVELS) / CODE_LEVELS
}

/// cd/m² → quantised code for one master encoding. For large frames the
/// rounding is done against a table of decoded half-code boundaries,
/// which avoids a transcendental per sample.
struct Quantizer {
    master: MasterSpec,
    limit: f64,
    mids: Option<Vec<f64>>,
}

impl Quantizer {
    fn new(master: MasterSpec, limit: f64, samples: usize) -> Result<Self> {
        let mids = if samples > 1 << 16 {
            let n = CODE_LEVELS as usize;
            Some((0..n).map(|k| master.decode((k as f64 + 0.5) / CODE_LEVELS)).collect::<Result<Vec<_>>>()?)
        } else {
            None
        };
        Ok(Self { master, limit, mids })
    }

    fn code(&self, nits: f64) -> f64 {
        let v = nits.clamp(0.0, self.limit);
        match &self.mids {
            Some(mids) => mids.partition_point(|&m| m <= v) as f64 / CODE_LEVELS,
            None => quantize(self.master.encode(v).unwrap_or(1.0)),
        }
    }
}

fn composed_mapping(spec: &SynthSpec) -> Vec<[f64; 2]> {
    let top = spec.sdr_curve.clip_point();
    let lo = libm::log10(1e-6_f64.min(top * 1e-3));
    let hi = libm::log10(top);
    let n = 4096;
    (0..n)
        .map(|k| {
            let x = libm::pow(10.0, lo + (hi - lo) * k as f64 / (n - 1) as f64);
            [spec.sdr_curve.apply(x), spec.hdr_curve.apply(x)]
        })
        .collect()
}

/// Renders one synthetic frame and its ground truth. Deterministic in the
/// spec (including its seed).
pub fn generate(spec: &SynthSpec) -> Result<SynthFrame> {
    spec.validate()?;
    let conv = Conversions::new()?;
    let enc = IctcpEncoder::new();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let scene = render_scene(spec, &conv, &mut rng);
    let exr = scene.map(|rgb| {
        let xyz = mul_vec(&conv.p3_to_xyz, scale(*rgb, spec.exposure));
        mul_vec(&conv.xyz_to_ap0, xyz).map(|c| c as f32 as f64)
    });
    let exr_xyz = exr.map(|v| mul_vec(&conv.ap0_to_xyz, *v));
    let mut sdr = render_master(&exr_xyz, &spec.sdr_curve, SDR_PEAK, &conv);
    let mut hdr = render_master(&exr_xyz, &spec.hdr_curve, codec::transfer::PQ_PEAK, &conv);
    let before_s = sdr.map(|v| conv.p3_luma(v));
    let before_h = hdr.map(|v| conv.p3_luma(v));
    let (sdr_clean, hdr_clean) = (sdr.clone(), hdr.clone());

    for inj in &spec.injections {
        apply_injection(inj, spec.region(inj), &mut sdr, &mut hdr, &conv, &enc, &mut rng)?;
    }

    let h_of = |ls: f64| {
        let x = spec.sdr_curve.invert(ls).unwrap_or_else(|| spec.sdr_curve.clip_point());
        spec.hdr_curve.apply(x)
    };
    let injected_dl = Plane::from_fn(spec.width, spec.height, |x, y| {
        let (ls0, lh0) = (*before_s.get(x, y), *before_h.get(x, y));
        let (ls1, lh1) = (conv.p3_luma(sdr.get(x, y)), conv.p3_luma(hdr.get(x, y)));
        if ls1 == ls0 && lh1 == lh0 {
            0.0
        } else {
            (lh1 - lh0) - (h_of(ls1) - h_of(ls0))
        }
    });

    let expected_labels = spec.faithful_rendering().then(|| {
        Plane::from_fn(spec.width, spec.height, |x, y| {
            let sdr_moved = sdr.get(x, y) != sdr_clean.get(x, y);
            let hdr_moved = hdr.get(x, y) != hdr_clean.get(x, y);
            match (sdr_moved, hdr_moved) {
                (true, false) => DecisionLabel::Recovery,
                (false, true) => DecisionLabel::Adjustment,
                _ => DecisionLabel::Neutral,
            }
        })
    });

    let has = |k: InjectionKind| spec.injections.iter().any(|i| i.kind == k);
    let expected_type = if has(InjectionKind::HighlightClip) {
        ResidualType::TypeI
    } else if has(InjectionKind::TextureResidual) {
        ResidualType::TypeII
    } else {
        ResidualType::TypeIII
    };
    let regions = |kind: InjectionKind, expected: fn(f64) -> f64| -> Vec<RegionTruth> {
        spec.injections
            .iter()
            .filter(|i| i.kind == kind)
            .map(|i| RegionTruth { region: spec.region(i), target: i.target, expected: expected(i.magnitude) })
            .collect()
    };

    let samples = spec.width * spec.height * 3;
    let sdr_q = Quantizer::new(MasterSpec::sdr_cinema(), SDR_PEAK, samples)?;
    let hdr_q = Quantizer::new(MasterSpec::hdr_cinema(), codec::transfer::PQ_PEAK, samples)?;
    let sdr_codes = sdr.map(|v| v.map(|c| sdr_q.code(c)));
    let hdr_codes = hdr.map(|v| v.map(|c| hdr_q.code(c)));

    let mapping = composed_mapping(spec);
    Ok(SynthFrame {
        exr,
        sdr_codes,
        hdr_codes,
        truth: GroundTruth {
            spec_hash: spec.spec_hash(),
            mapping,
            injected_dl,
            expected_labels,
            expected_type,
            hue_regions: regions(InjectionKind::HueRotate, |m| hue_diff(m, 0.0)),
            chroma_regions: regions(InjectionKind::ChromaScale, |m| m),
            injection_free: spec.injections.is_empty(),
        },
    })
}

/// Convenience set of specs: one frame each of the three residual regimes
/// (highlight plateau, material texture, clean) on textured content.
///
/// The plateau sits at the 300 cd/m² HDR ceiling and the checker is strong
/// enough to stand apart from clean frames in z-scored feature space, while
/// plateau frames still carry over 90% of the summed |ΔL|.
pub fn taxonomy_specs(width: usize, height: usize, frames_per_regime: usize, seed: u64) -> Vec<SynthSpec> {
    let (w, h) = (width, height);
    let region = ActiveArea::new(w / 8, h / 8, w / 8 + w / 2, h / 8 + h / 2);
    let mut out = Vec::new();
    for i in 0..frames_per_regime {
        let base = SynthSpec::new(w, h, SceneKind::Textured, seed).for_frame(i as u32);
        let mut clip = base.clone();
        clip.injections = vec![Injection {
            kind: InjectionKind::HighlightClip,
            region: Some(region),
            magnitude: 300.0,
            target: Target::Hdr,
        }];
        let mut texture = base.clone();
        texture.injections = vec![Injection {
            kind: InjectionKind::TextureResidual,
            region: Some(region),
            magnitude: 24.0,
            target: Target::Hdr,
        }];
        out.extend([clip, texture, base]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{build_triplet, MasterSpec};

    fn triplet(f: &SynthFrame) -> crate::ingest::FrameTriplet {
        build_triplet(0, f.exr.clone(), &f.sdr_codes, &f.hdr_codes, &MasterSpec::sdr_cinema(), &MasterSpec::hdr_cinema())
            .unwrap()
    }

    #[test]
    fn deterministic_and_hashed() {
        let spec = SynthSpec::new(32, 24, SceneKind::Blobs, 5);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.exr, b.exr);
        assert_eq!(a.sdr_codes, b.sdr_codes);
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.truth.spec_hash.len(), 64);
        assert_ne!(spec.spec_hash(), spec.for_frame(1).spec_hash());
    }

    #[test]
    fn clean_frame_follows_composed_curve() {
        let spec = SynthSpec::new(64, 48, SceneKind::Ramp, 1);
        let f = generate(&spec).unwrap();
        let t = triplet(&f);
        assert!(f.truth.injected_dl.data().iter().all(|&v| v == 0.0));
        for (x, y) in t.active.coords() {
            let (ls, lh) = (*t.sdr_luma.get(x, y), *t.hdr_luma.get(x, y));
            if ls < 47.0 {
                let want = f.truth.composed(ls).unwrap();
                assert!((lh - want).abs() <= 2e-3 * want + 1e-3, "{ls} {lh} {want}");
            }
        }
    }

    #[test]
    fn identity_curves_give_equal_masters() {
        let mut spec = SynthSpec::new(32, 32, SceneKind::Textured, 2);
        spec.sdr_curve = ToneCurve::linear(10.0, 48.0);
        spec.hdr_curve = ToneCurve::linear(10.0, 48.0);
        let t = triplet(&generate(&spec).unwrap());
        for (s, h) in t.sdr_luma.data().iter().zip(t.hdr_luma.data()) {
            assert!((s - h).abs() <= 1e-3 * s.max(0.05));
        }
    }

    #[test]
    fn hue_rotation_and_labels() {
        let mut spec = SynthSpec::new(32, 32, SceneKind::Textured, 3);
        spec.tint = 0.6;
        spec.sdr_curve = ToneCurve::linear(30.0, 48.0);
        spec.hdr_curve = ToneCurve::linear(30.0, 48.0);
        spec.injections.push(Injection {
            kind: InjectionKind::HueRotate,
            region: Some(ActiveArea::new(8, 8, 24, 24)),
            magnitude: 20.0,
            target: Target::Hdr,
        });
        let f = generate(&spec).unwrap();
        let labels = f.truth.expected_labels.as_ref().unwrap();
        assert_eq!(*labels.get(10, 10), DecisionLabel::Adjustment);
        assert_eq!(*labels.get(0, 0), DecisionLabel::Neutral);
        assert_eq!(f.truth.hue_regions[0].expected, 20.0);
        let (s, h) = crate::decision::master_ictcp(&triplet(&f)).unwrap();
        let mut sum = 0.0;
        let mut n = 0;
        for (x, y) in ActiveArea::new(8, 8, 24, 24).coords() {
            let (a, b) = (s.pixels.get(x, y), h.pixels.get(x, y));
            if a.c > 0.005 && b.c > 0.005 {
                sum += hue_diff(a.h, b.h);
                n += 1;
            }
        }
        assert!(n > 100);
        assert!((sum / n as f64 - 20.0).abs() < 0.5, "{}", sum / n as f64);
    }

    #[test]
    fn table_quantizer_matches_direct_rounding() {
        for master in [MasterSpec::sdr_cinema(), MasterSpec::hdr_cinema()] {
            let direct = Quantizer::new(master, 10_000.0, 0).unwrap();
            let table = Quantizer::new(master, 10_000.0, 1 << 20).unwrap();
            let top = if master.transfer == crate::ingest::Transfer::Pq { 10_000.0 } else { 48.0 };
            let (mut same, mut n) = (0, 0);
            for i in 0..20_000 {
                let v = top * (i as f64 / 19_999.0).powi(3);
                let (a, b) = (direct.code(v.min(top)), table.code(v.min(top)));
                assert!((a - b).abs() <= 1.0 / CODE_LEVELS + 1e-15);
                same += usize::from(a == b);
                n += 1;
            }
            assert!(same as f64 / n as f64 > 0.999);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = SynthSpec::new(16, 16, SceneKind::Ramp, 0);
        spec.injections.push(Injection {
            kind: InjectionKind::Noise,
            region: Some(ActiveArea::new(0, 0, 20, 4)),
            magnitude: 1.0,
            target: Target::Hdr,
        });
        assert!(generate(&spec).is_err());
        let mut spec = SynthSpec::new(16, 16, SceneKind::Ramp, 0);
        spec.sdr_curve.gain = -1.0;
        assert!(generate(&spec).is_err());
    }
}
