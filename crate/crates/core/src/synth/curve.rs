//! Parametric display-rendering curves used by the generator.

use alloc::format;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Linear toe with an optional power shoulder and a hard clip.
///
/// ```text
/// f(x) = black + gain·x                                   x ≤ knee
/// f(x) = black + gain·knee·(1 + ((x/knee)^p − 1)/p)       x > knee
/// ```
///
/// then `min(f, clip)`. The two pieces meet with equal slope at the knee,
/// so the curve is strictly increasing below the clip for any `p > 0`.
/// Without a knee the curve is linear.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneCurve {
    pub gain: f64,
    #[serde(default)]
    pub knee: Option<f64>,
    #[serde(default = "one")]
    pub exponent: f64,
    #[serde(default)]
    pub black: f64,
    pub clip: f64,
}

fn one() -> f64 {
    1.0
}

impl ToneCurve {
    pub fn linear(gain: f64, clip: f64) -> Self {
        Self { gain, knee: None, exponent: 1.0, black: 0.0, clip }
    }

    /// A 48 cd/m² cinema-style rendering: mid-grey 0.18 lands near
    /// 7.2 cd/m², highlights roll off towards the clip.
    pub fn sdr_default() -> Self {
        Self { gain: 40.0, knee: Some(0.18), exponent: 0.35, black: 0.005, clip: 48.0 }
    }

    /// A 300 cd/m² rendering sharing the SDR mid-grey with a later, softer
    /// shoulder.
    pub fn hdr_default() -> Self {
        Self { gain: 40.0, knee: Some(0.5), exponent: 0.6, black: 0.005, clip: 300.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.gain > 0.0
            && self.gain.is_finite()
            && self.exponent > 0.0
            && self.exponent.is_finite()
            && self.black >= 0.0
            && self.clip > self.black
            && self.knee.map_or(true, |k| k > 0.0 && k.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid tone curve {self:?}")))
        }
    }

    /// True when the curve is `gain·x` with no black offset or shoulder.
    pub fn is_linear(&self) -> bool {
        self.knee.is_none() && self.black == 0.0
    }

    fn unclipped(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self.knee {
            Some(k) if x > k => {
                let p = self.exponent;
                self.black + self.gain * k * (1.0 + (libm::pow(x / k, p) - 1.0) / p)
            }
            _ => self.black + self.gain * x,
        }
    }

    /// Display luminance (cd/m²) for relative scene luminance `x`.
    pub fn apply(&self, x: f64) -> f64 {
        self.unclipped(x).min(self.clip)
    }

    /// Scene luminance at which the clip is reached.
    pub fn clip_point(&self) -> f64 {
        self.invert_unclipped(self.clip)
    }

    fn invert_unclipped(&self, y: f64) -> f64 {
        let v = (y - self.black).max(0.0);
        match self.knee {
            Some(k) if v > self.gain * k => {
                let p = self.exponent;
                k * libm::pow(1.0 + p * (v / (self.gain * k) - 1.0), 1.0 / p)
            }
            _ => v / self.gain,
        }
    }

    /// Inverse on `[black, clip]`; `None` outside it.
    pub fn invert(&self, y: f64) -> Option<f64> {
        (y >= self.black && y <= self.clip).then(|| self.invert_unclipped(y))
    }
}
