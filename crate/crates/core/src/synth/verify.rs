//! Compares analyzer outputs on a generated corpus with its ground truth.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;

use serde::{Deserialize, Serialize};

use super::{GroundTruth, RegionTruth, Target};
use crate::codec::{hue_diff, Ictcp};
use crate::decision::DecisionLabel;
use crate::lumamap::{MonotoneFit, ResidualType};
use crate::plane::{ActiveArea, Plane};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max relative error of the recovered baseline on clean frames.
    pub mapping_rel: f64,
    /// Share of pixel mass (centred) whose bins are checked.
    pub mapping_mass: f64,
    /// Min share of frames whose residual type matches construction.
    pub segmentation: f64,
    /// Min agreement of non-neutral decision labels.
    pub decision: f64,
    /// Max error of region mean |Δh|, degrees.
    pub hue_deg: f64,
    /// Max relative error of region mean chroma ratio.
    pub chroma_rel: f64,
    pub chroma_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mapping_rel: 0.01,
            mapping_mass: 0.9,
            segmentation: 0.95,
            decision: 0.99,
            hue_deg: 0.5,
            chroma_rel: 0.02,
            chroma_floor: crate::chromastats::DEFAULT_CHROMA_FLOOR,
        }
    }
}

/// What the analyzer reported for one generated frame.
#[derive(Clone, Debug, Default)]
pub struct FrameObservation<'a> {
    /// Hash of the spec the analysis claims to correspond to.
    pub spec_hash: String,
    pub area: ActiveArea,
    pub fit: Option<&'a MonotoneFit>,
    pub residual_type: Option<ResidualType>,
    pub labels: Option<&'a Plane<DecisionLabel>>,
    pub sdr_ictcp: Option<&'a Plane<Ictcp>>,
    pub hdr_ictcp: Option<&'a Plane<Ictcp>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub limit: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Worst relative error of the fitted knots against h over bins lying
/// wholly inside the central `mass` of pixel weight. `None` when no bin
/// qualifies.
pub fn mapping_error(fit: &MonotoneFit, truth: &GroundTruth, mass: f64) -> Option<f64> {
    let total = fit.total_weight() as f64;
    let lo = total * (1.0 - mass) / 2.0;
    let hi = total - lo;
    let mut cum = 0.0;
    let mut worst: Option<f64> = None;
    for k in 0..fit.bins() {
        let w = fit.weights[k] as f64;
        let start = cum;
        cum += w;
        if w == 0.0 || start < lo || cum > hi {
            continue;
        }
        let x = libm::pow(10.0, fit.centers[k]);
        if let Some(h) = truth.composed(x) {
            let e = (fit.fitted_values[k] - h).abs() / h;
            worst = Some(worst.map_or(e, |v: f64| v.max(e)));
        }
    }
    worst
}

fn region_hue(obs: &FrameObservation, r: &RegionTruth, floor: f64) -> Option<f64> {
    let (s, h) = (obs.sdr_ictcp?, obs.hdr_ictcp?);
    let area = r.region.intersect(&obs.area);
    let (mut sum, mut n) = (0.0, 0usize);
    for (x, y) in area.coords() {
        let (a, b) = (s.get(x, y), h.get(x, y));
        if a.c > floor && b.c > floor {
            sum += hue_diff(a.h, b.h);
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

fn region_chroma_ratio(obs: &FrameObservation, r: &RegionTruth, floor: f64) -> Option<f64> {
    let (s, h) = (obs.sdr_ictcp?, obs.hdr_ictcp?);
    let (t, o) = match r.target {
        Target::Sdr => (s, h),
        Target::Hdr => (h, s),
    };
    let area = r.region.intersect(&obs.area);
    let (mut sum, mut n) = (0.0, 0usize);
    for (x, y) in area.coords() {
        let (a, b) = (t.get(x, y), o.get(x, y));
        if b.c > floor {
            sum += a.c / b.c;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Runs every applicable check. Frames are paired by position; a hash
/// mismatch on any pair refuses the whole comparison.
pub fn verify(observations: &[FrameObservation], truths: &[GroundTruth], tol: &Tolerances) -> Result<VerifyReport> {
    if observations.len() != truths.len() {
        return Err(Error::Config(format!(
            "{} observations for {} truth records",
            observations.len(),
            truths.len()
        )));
    }
    for (i, (o, t)) in observations.iter().zip(truths).enumerate() {
        if o.spec_hash != t.spec_hash {
            return Err(Error::Refused(format!(
                "frame {i}: spec hash {} does not match truth {}",
                o.spec_hash, t.spec_hash
            )));
        }
    }
    let mut checks = Vec::new();

    let mapping: Vec<f64> = observations
        .iter()
        .zip(truths)
        .filter(|(_, t)| t.injection_free)
        .filter_map(|(o, t)| mapping_error(o.fit?, t, tol.mapping_mass))
        .collect();
    if !mapping.is_empty() {
        let worst = mapping.iter().copied().fold(0.0, f64::max);
        checks.push(Check {
            name: "mapping".into(),
            passed: worst <= tol.mapping_rel,
            measured: worst,
            limit: tol.mapping_rel,
            detail: format!("worst relative baseline error over {} clean frames", mapping.len()),
        });
    }

    let typed: Vec<bool> = observations
        .iter()
        .zip(truths)
        .filter_map(|(o, t)| o.residual_type.map(|r| r == t.expected_type))
        .collect();
    if !typed.is_empty() {
        let agree = typed.iter().filter(|&&b| b).count() as f64 / typed.len() as f64;
        checks.push(Check {
            name: "segmentation".into(),
            passed: agree >= tol.segmentation,
            measured: agree,
            limit: tol.segmentation,
            detail: format!("residual type agreement over {} frames", typed.len()),
        });
    }

    let (mut decided, mut agree) = (0u64, 0u64);
    let mut labelled_frames = 0;
    for (o, t) in observations.iter().zip(truths) {
        let (Some(got), Some(want)) = (o.labels, t.expected_labels.as_ref()) else {
            continue;
        };
        labelled_frames += 1;
        for i in o.area.indices(got.width()) {
            let g = got.data()[i];
            if matches!(g, DecisionLabel::Recovery | DecisionLabel::Adjustment) {
                decided += 1;
                agree += u64::from(g == want.data()[i]);
            }
        }
    }
    if labelled_frames > 0 {
        let share = if decided == 0 { 1.0 } else { agree as f64 / decided as f64 };
        checks.push(Check {
            name: "decision".into(),
            passed: share >= tol.decision,
            measured: share,
            limit: tol.decision,
            detail: format!("{agree}/{decided} non-neutral labels match over {labelled_frames} frames"),
        });
    }

    for (i, (o, t)) in observations.iter().zip(truths).enumerate() {
        for (k, r) in t.hue_regions.iter().enumerate() {
            let got = region_hue(o, r, tol.chroma_floor);
            let err = got.map_or(f64::INFINITY, |g| (g - r.expected).abs());
            checks.push(Check {
                name: format!("hue[{i}.{k}]"),
                passed: err <= tol.hue_deg,
                measured: got.unwrap_or(f64::NAN),
                limit: tol.hue_deg,
                detail: format!("region mean |Δh| vs {}°", r.expected),
            });
        }
        for (k, r) in t.chroma_regions.iter().enumerate() {
            let got = region_chroma_ratio(o, r, tol.chroma_floor);
            let err = got.map_or(f64::INFINITY, |g| (g - r.expected).abs() / r.expected);
            checks.push(Check {
                name: format!("chroma[{i}.{k}]"),
                passed: err <= tol.chroma_rel,
                measured: got.unwrap_or(f64::NAN),
                limit: tol.chroma_rel,
                detail: format!("region mean chroma ratio vs {}", r.expected),
            });
        }
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { checks, passed })
}
