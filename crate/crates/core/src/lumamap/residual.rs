//! Luminance residuals against the monotone baseline and their
//! energy/structure features.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::gradient::mean_gradient;
use super::isotonic::MonotoneFit;
use crate::plane::{ActiveArea, Plane};
use crate::{stats, Error, Result};

/// ΔL = L_H − f̂(L_S) inside the area; 0 outside.
pub fn residual_plane(hdr: &Plane<f64>, fit: &MonotoneFit, sdr: &Plane<f64>, area: &ActiveArea) -> Plane<f64> {
    let mut out = Plane::filled(hdr.width(), hdr.height(), 0.0);
    for (x, y) in area.coords() {
        *out.get_mut(x, y) = hdr.get(x, y) - fit.evaluate(*sdr.get(x, y));
    }
    out
}

/// The (E_P95, S) point of one frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualFeatures {
    /// Nearest-rank 95th percentile of |ΔL|, cd/m².
    pub e_p95: f64,
    /// Mean Sobel magnitude of ΔL.
    pub s_struct: f64,
}

pub fn residual_features(delta: &Plane<f64>, area: &ActiveArea) -> Result<ResidualFeatures> {
    if area.is_empty() {
        return Err(Error::EmptyInput("residual features need a non-empty area"));
    }
    let mut abs: Vec<f64> = area.indices(delta.width()).map(|i| delta.data()[i].abs()).collect();
    let e_p95 = stats::percentile_nearest_rank(&mut abs, 95.0).unwrap_or(0.0);
    let s_struct = mean_gradient(delta, area).unwrap_or(0.0);
    Ok(ResidualFeatures { e_p95, s_struct })
}

/// Residual mass of one frame, used for the per-type energy split.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualEnergy {
    pub pixels: u64,
    /// Σ|ΔL|
    pub abs_sum: f64,
    /// ΣΔL²
    pub sq_sum: f64,
}

pub fn residual_energy(delta: &Plane<f64>, area: &ActiveArea) -> ResidualEnergy {
    let mut e = ResidualEnergy { pixels: area.pixel_count() as u64, ..Default::default() };
    for i in area.indices(delta.width()) {
        let d = delta.data()[i];
        e.abs_sum += d.abs();
        e.sq_sum += d * d;
    }
    e
}
