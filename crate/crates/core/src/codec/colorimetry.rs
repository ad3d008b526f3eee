//! Primaries, white points, RGB↔XYZ matrices and Bradford adaptation.

use alloc::format;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[inline]
pub fn mul_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn determinant(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse by adjugate; `None` for (near-)singular input.
pub fn invert(m: &Mat3) -> Option<Mat3> {
    let det = determinant(m);
    if det.abs() < 1e-300 || !det.is_finite() {
        return None;
    }
    let inv_det = 1.0 / det;
    let c = |r0: usize, c0: usize, r1: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    Some([
        [c(1, 1, 2, 2) * inv_det, -c(0, 1, 2, 2) * inv_det, c(0, 1, 1, 2) * inv_det],
        [-c(1, 0, 2, 2) * inv_det, c(0, 0, 2, 2) * inv_det, -c(0, 0, 1, 2) * inv_det],
        [c(1, 0, 2, 1) * inv_det, -c(0, 0, 2, 1) * inv_det, c(0, 0, 1, 1) * inv_det],
    ])
}

/// CIE 1931 xy chromaticity of a white point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WhitePoint {
    pub x: f64,
    pub y: f64,
}

impl WhitePoint {
    pub const D65: Self = Self { x: 0.3127, y: 0.3290 };
    /// ACES white (≈ D60).
    pub const ACES: Self = Self { x: 0.32168, y: 0.33767 };
    /// DCI calibration white.
    pub const DCI: Self = Self { x: 0.314, y: 0.351 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        let wp = Self { x, y };
        wp.validate()?;
        Ok(wp)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.x > 0.0 && self.x < 1.0 && self.y > 0.0 && self.y < 1.0 && self.x + self.y < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("degenerate white point ({}, {})", self.x, self.y)))
        }
    }

    /// XYZ of this white normalised to Y = 1.
    pub fn xyz(&self) -> [f64; 3] {
        [self.x / self.y, 1.0, (1.0 - self.x - self.y) / self.y]
    }
}

/// RGB primary sets understood by the toolkit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Primaries {
    /// DCI-P3 primaries (used with a D65 white by default).
    #[serde(alias = "DCI-P3-D65", alias = "p3")]
    P3D65,
    /// ACES 2065-1 AP0.
    #[serde(alias = "ACES-AP0", alias = "ap0")]
    AcesAp0,
    /// ITU-R BT.2020.
    #[serde(alias = "BT2020")]
    Bt2020,
}

impl Primaries {
    /// Red, green, blue xy chromaticities.
    pub fn chromaticities(&self) -> [[f64; 2]; 3] {
        match self {
            Primaries::P3D65 => [[0.680, 0.320], [0.265, 0.690], [0.150, 0.060]],
            Primaries::AcesAp0 => [[0.7347, 0.2653], [0.0, 1.0], [0.0001, -0.0770]],
            Primaries::Bt2020 => [[0.708, 0.292], [0.170, 0.797], [0.131, 0.046]],
        }
    }

    pub fn native_white(&self) -> WhitePoint {
        match self {
            Primaries::AcesAp0 => WhitePoint::ACES,
            Primaries::P3D65 | Primaries::Bt2020 => WhitePoint::D65,
        }
    }
}

/// Normalised primary matrix: linear RGB to XYZ under `white`, with RGB
/// (1, 1, 1) mapping to the white's XYZ at Y = 1.
pub fn rgb_to_xyz_matrix(primaries: Primaries, white: WhitePoint) -> Result<Mat3> {
    white.validate()?;
    let p = primaries.chromaticities();
    let mut m = [[0.0; 3]; 3];
    for (col, [x, y]) in p.iter().copied().enumerate() {
        if y == 0.0 {
            return Err(Error::Config(format!("primary with y = 0 in {primaries:?}")));
        }
        m[0][col] = x / y;
        m[1][col] = 1.0;
        m[2][col] = (1.0 - x - y) / y;
    }
    let inv = invert(&m).ok_or_else(|| Error::Config(format!("singular primaries {primaries:?}")))?;
    let s = mul_vec(&inv, white.xyz());
    for row in m.iter_mut() {
        for (col, v) in row.iter_mut().enumerate() {
            *v *= s[col];
        }
    }
    Ok(m)
}

/// Bradford cone-response matrix.
pub const BRADFORD: Mat3 = [
    [0.8951, 0.2664, -0.1614],
    [-0.7502, 1.7135, 0.0367],
    [0.0389, -0.0685, 1.0296],
];

/// Bradford chromatic adaptation matrix from `src` to `dst` white.
pub fn bradford_matrix(src: WhitePoint, dst: WhitePoint) -> Result<Mat3> {
    src.validate()?;
    dst.validate()?;
    if src == dst {
        return Ok(IDENTITY);
    }
    let inv = invert(&BRADFORD).expect("Bradford matrix is invertible");
    let s = mul_vec(&BRADFORD, src.xyz());
    let d = mul_vec(&BRADFORD, dst.xyz());
    let scale = [
        [d[0] / s[0], 0.0, 0.0],
        [0.0, d[1] / s[1], 0.0],
        [0.0, 0.0, d[2] / s[2]],
    ];
    Ok(mul(&inv, &mul(&scale, &BRADFORD)))
}

/// Adapts one XYZ triple between white points with the Bradford CAT.
pub fn bradford_adapt(xyz: [f64; 3], src: WhitePoint, dst: WhitePoint) -> Result<[f64; 3]> {
    Ok(mul_vec(&bradford_matrix(src, dst)?, xyz))
}

/// Linear RGB (given primaries and encoding white) to D65 XYZ, Bradford
/// adapting when the encoding white is not D65.
pub fn rgb_to_xyz_d65_matrix(primaries: Primaries, white: WhitePoint) -> Result<Mat3> {
    let npm = rgb_to_xyz_matrix(primaries, white)?;
    Ok(mul(&bradford_matrix(white, WhitePoint::D65)?, &npm))
}
