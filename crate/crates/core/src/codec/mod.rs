//! Transfer functions and colour-space conversions: PQ, Gamma 2.6, ACES
//! AP0 / P3 / BT.2020 to XYZ, Bradford adaptation, ICtCp and ΔE_ITP.
//!
//! All conversions are pure functions in 64-bit floating point.

pub mod colorimetry;
pub mod ictcp;
pub mod transfer;

use serde::{Deserialize, Serialize};

use crate::plane::Plane;
use crate::Result;

pub use colorimetry::{bradford_adapt, bradford_matrix, rgb_to_xyz_matrix, Mat3, Primaries, WhitePoint};
pub use ictcp::{delta_e_itp, hue_diff, Ictcp, IctcpEncoder};
pub use transfer::{gamma26_decode, gamma26_encode, hdr_decode, pq_eotf, pq_inverse_eotf};

/// Whether samples are proportional to scene radiance or to display light.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Referred {
    Scene,
    Display,
}

/// Linear RGB samples tagged with primaries and encoding white.
///
/// Display-referred planes hold absolute cd/m² per channel; scene-referred
/// planes hold relative radiance.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRgbPlane {
    pub primaries: Primaries,
    pub white: WhitePoint,
    pub referred: Referred,
    pub samples: Plane<[f64; 3]>,
}

impl LinearRgbPlane {
    pub fn new(primaries: Primaries, white: WhitePoint, referred: Referred, samples: Plane<[f64; 3]>) -> Self {
        Self { primaries, white, referred, samples }
    }

    pub fn width(&self) -> usize {
        self.samples.width()
    }

    pub fn height(&self) -> usize {
        self.samples.height()
    }
}

/// XYZ samples relative to a stated white.
#[derive(Clone, Debug, PartialEq)]
pub struct XyzPlane {
    pub white: WhitePoint,
    pub samples: Plane<[f64; 3]>,
}

/// Per-pixel ICtCp with a count of pixels whose LMS needed clamping.
#[derive(Clone, Debug, PartialEq)]
pub struct IctcpPlane {
    pub pixels: Plane<Ictcp>,
    pub clamped: usize,
}

/// Converts to XYZ under the plane's own encoding white.
pub fn rgb_to_xyz_native(plane: &LinearRgbPlane) -> Result<XyzPlane> {
    let m = rgb_to_xyz_matrix(plane.primaries, plane.white)?;
    Ok(XyzPlane { white: plane.white, samples: plane.samples.map(|&v| colorimetry::mul_vec(&m, v)) })
}

/// Converts to D65 XYZ, Bradford-adapting from the plane's white (ACES
/// white for AP0 input) when it differs from D65.
pub fn rgb_to_xyz(plane: &LinearRgbPlane) -> Result<XyzPlane> {
    let m = colorimetry::rgb_to_xyz_d65_matrix(plane.primaries, plane.white)?;
    Ok(XyzPlane { white: WhitePoint::D65, samples: plane.samples.map(|&v| colorimetry::mul_vec(&m, v)) })
}

/// Luminance (Y row of [`rgb_to_xyz`]) for every pixel.
pub fn luminance(plane: &LinearRgbPlane) -> Result<Plane<f64>> {
    let m = colorimetry::rgb_to_xyz_d65_matrix(plane.primaries, plane.white)?;
    let row = m[1];
    Ok(plane.samples.map(|v| row[0] * v[0] + row[1] * v[1] + row[2] * v[2]))
}

/// Adapts an XYZ plane to another white; a no-op clone when the whites match.
pub fn adapt_plane(plane: &XyzPlane, dst: WhitePoint) -> Result<XyzPlane> {
    if plane.white == dst {
        return Ok(plane.clone());
    }
    let m = bradford_matrix(plane.white, dst)?;
    Ok(XyzPlane { white: dst, samples: plane.samples.map(|&v| colorimetry::mul_vec(&m, v)) })
}

/// D65 XYZ (scaled by `scale` to cd/m²) to ICtCp.
pub fn xyz_to_ictcp(xyz: &XyzPlane, scale: f64) -> IctcpPlane {
    let enc = IctcpEncoder::new();
    let mut clamped = 0usize;
    let pixels = xyz.samples.map(|&v| {
        let (p, c) = enc.encode(v, scale);
        clamped += usize::from(c);
        p
    });
    IctcpPlane { pixels, clamped }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ap0_unit_white_is_d65_at_y_one() {
        let plane = LinearRgbPlane::new(
            Primaries::AcesAp0,
            WhitePoint::ACES,
            Referred::Scene,
            Plane::filled(2, 2, [1.0, 1.0, 1.0]),
        );
        let xyz = rgb_to_xyz(&plane).unwrap();
        let d65 = WhitePoint::D65.xyz();
        for v in xyz.samples.data() {
            for c in 0..3 {
                assert!((v[c] - d65[c]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn p3_black_and_white() {
        let plane = LinearRgbPlane::new(
            Primaries::P3D65,
            WhitePoint::D65,
            Referred::Display,
            Plane::from_vec(2, 1, alloc::vec![[0.0; 3], [48.0; 3]]).unwrap(),
        );
        let xyz = rgb_to_xyz(&plane).unwrap();
        assert_eq!(*xyz.samples.get(0, 0), [0.0; 3]);
        assert!((xyz.samples.get(1, 0)[1] - 48.0).abs() < 1e-6);
        let y = luminance(&plane).unwrap();
        assert!((y.get(1, 0) - 48.0).abs() < 1e-9);
    }

    #[test]
    fn ictcp_plane_invariants() {
        let plane = XyzPlane {
            white: WhitePoint::D65,
            samples: Plane::from_fn(4, 4, |x, y| [10.0 + x as f64, 12.0 + y as f64, 3.0 * x as f64]),
        };
        let ict = xyz_to_ictcp(&plane, 1.0);
        for p in ict.pixels.data() {
            assert!((p.c - (p.ct * p.ct + p.cp * p.cp).sqrt()).abs() < 1e-15);
            assert!((0.0..360.0).contains(&p.h));
        }
    }

    #[test]
    fn identical_whites_pass_through() {
        let plane = XyzPlane { white: WhitePoint::D65, samples: Plane::filled(3, 3, [0.1, 0.2, 0.3]) };
        assert_eq!(adapt_plane(&plane, WhitePoint::D65).unwrap(), plane);
    }
}
