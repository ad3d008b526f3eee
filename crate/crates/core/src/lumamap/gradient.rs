//! Sobel gradient magnitudes and gradient-domain Pearson correlation.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::plane::{ActiveArea, Plane};
use crate::{stats, Error, Result};

/// 3×3 Sobel gradient magnitude inside `area`, replicating the area's
/// border pixels. Pixels outside the area are 0.
pub fn sobel_magnitude(plane: &Plane<f64>, area: &ActiveArea) -> Plane<f64> {
    let mut out = Plane::filled(plane.width(), plane.height(), 0.0);
    if area.is_empty() {
        return out;
    }
    let at = |x: isize, y: isize| -> f64 {
        let xc = x.clamp(area.x0 as isize, area.x1 as isize - 1) as usize;
        let yc = y.clamp(area.y0 as isize, area.y1 as isize - 1) as usize;
        *plane.get(xc, yc)
    };
    for (x, y) in area.coords() {
        let (xi, yi) = (x as isize, y as isize);
        let gx = (at(xi + 1, yi - 1) + 2.0 * at(xi + 1, yi) + at(xi + 1, yi + 1))
            - (at(xi - 1, yi - 1) + 2.0 * at(xi - 1, yi) + at(xi - 1, yi + 1));
        let gy = (at(xi - 1, yi + 1) + 2.0 * at(xi, yi + 1) + at(xi + 1, yi + 1))
            - (at(xi - 1, yi - 1) + 2.0 * at(xi, yi - 1) + at(xi + 1, yi - 1));
        *out.get_mut(x, y) = libm::sqrt(gx * gx + gy * gy);
    }
    out
}

/// Mean Sobel magnitude over the area.
pub fn mean_gradient(plane: &Plane<f64>, area: &ActiveArea) -> Option<f64> {
    let g = sobel_magnitude(plane, area);
    stats::mean(area.indices(plane.width()).map(|i| g.data()[i]))
}

/// Gradient-domain structural similarity of two planes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientStats {
    /// Pearson correlation of the Sobel magnitudes.
    pub rho: f64,
    pub mean_grad_a: f64,
    pub mean_grad_b: f64,
}

/// Pearson ρ of Sobel gradient magnitudes over the area. `Ok(None)` when
/// either magnitude field has zero variance (flat input).
pub fn gradient_correlation(a: &Plane<f64>, b: &Plane<f64>, area: &ActiveArea) -> Result<Option<GradientStats>> {
    if !a.same_shape(b) {
        return Err(Error::Registration("gradient planes differ in size".into()));
    }
    let ga = sobel_magnitude(a, area);
    let gb = sobel_magnitude(b, area);
    let va: Vec<f64> = area.indices(a.width()).map(|i| ga.data()[i]).collect();
    let vb: Vec<f64> = area.indices(a.width()).map(|i| gb.data()[i]).collect();
    let Some(rho) = stats::pearson(&va, &vb) else {
        return Ok(None);
    };
    Ok(Some(GradientStats {
        rho,
        mean_grad_a: stats::mean(va.iter().copied()).unwrap_or(0.0),
        mean_grad_b: stats::mean(vb.iter().copied()).unwrap_or(0.0),
    }))
}
