//! BT.2100 ICtCp (PQ variant), ΔE_ITP and circular hue differences.

use serde::{Deserialize, Serialize};

use super::colorimetry::{invert, mul_vec, rgb_to_xyz_matrix, Mat3, Primaries, WhitePoint};
use super::transfer::{pq_eotf_unchecked, pq_inverse_unchecked, PQ_PEAK};

/// BT.2020 RGB to LMS crosstalk matrix.
pub const RGB2020_TO_LMS: Mat3 = [
    [1688.0 / 4096.0, 2146.0 / 4096.0, 262.0 / 4096.0],
    [683.0 / 4096.0, 2951.0 / 4096.0, 462.0 / 4096.0],
    [99.0 / 4096.0, 309.0 / 4096.0, 3688.0 / 4096.0],
];

/// PQ-encoded L'M'S' to ICtCp rotation.
pub const LMS_TO_ICTCP: Mat3 = [
    [0.5, 0.5, 0.0],
    [6610.0 / 4096.0, -13613.0 / 4096.0, 7003.0 / 4096.0],
    [17933.0 / 4096.0, -17390.0 / 4096.0, -543.0 / 4096.0],
];

/// ΔE_ITP scale, one unit ≈ one JND.
pub const ITP_SCALE: f64 = 720.0;
/// Weight applied to Ct to form the T axis of ITP.
pub const ITP_T_WEIGHT: f64 = 0.5;

/// One ICtCp sample with its derived chroma magnitude and hue angle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Ictcp {
    pub i: f64,
    pub ct: f64,
    pub cp: f64,
    /// `sqrt(ct² + cp²)`
    pub c: f64,
    /// `atan2(cp, ct)` in degrees, [0, 360)
    pub h: f64,
}

impl Ictcp {
    pub fn new(i: f64, ct: f64, cp: f64) -> Self {
        Self { i, ct, cp, c: libm::hypot(ct, cp), h: hue_degrees(ct, cp) }
    }
}

/// `atan2(cp, ct)` mapped to [0, 360).
pub fn hue_degrees(ct: f64, cp: f64) -> f64 {
    let h = libm::atan2(cp, ct).to_degrees();
    let h = if h < 0.0 { h + 360.0 } else { h };
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

/// Precomputed XYZ(D65) → ICtCp conversion.
#[derive(Clone, Debug)]
pub struct IctcpEncoder {
    xyz_to_lms: Mat3,
    lms_to_xyz: Mat3,
    ictcp_to_lms: Mat3,
}

impl Default for IctcpEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl IctcpEncoder {
    pub fn new() -> Self {
        let rgb_to_xyz = rgb_to_xyz_matrix(Primaries::Bt2020, WhitePoint::D65).expect("BT.2020 matrix");
        let xyz_to_rgb = invert(&rgb_to_xyz).expect("BT.2020 matrix is invertible");
        let xyz_to_lms = super::colorimetry::mul(&RGB2020_TO_LMS, &xyz_to_rgb);
        Self {
            xyz_to_lms,
            lms_to_xyz: invert(&xyz_to_lms).expect("LMS matrix is invertible"),
            ictcp_to_lms: invert(&LMS_TO_ICTCP).expect("ICtCp matrix is invertible"),
        }
    }

    /// Converts absolute XYZ (D65, cd/m² after multiplying by `scale`).
    /// LMS components outside [0, 10000] are clamped before PQ encoding;
    /// the return flag reports whether any clamping happened.
    pub fn encode(&self, xyz: [f64; 3], scale: f64) -> (Ictcp, bool) {
        let lms = mul_vec(&self.xyz_to_lms, [xyz[0] * scale, xyz[1] * scale, xyz[2] * scale]);
        let mut clamped = false;
        let mut pq = [0.0; 3];
        for (out, v) in pq.iter_mut().zip(lms) {
            let v = if v.is_nan() { 0.0 } else { v };
            let c = v.clamp(0.0, PQ_PEAK);
            clamped |= c != v;
            *out = pq_inverse_unchecked(c);
        }
        let [i, ct, cp] = mul_vec(&LMS_TO_ICTCP, pq);
        (Ictcp::new(i, ct, cp), clamped)
    }

    /// Inverse of [`Self::encode`] with unit scale; ICtCp values whose LMS
    /// code falls outside [0, 1] are clamped.
    pub fn decode(&self, v: &Ictcp) -> [f64; 3] {
        let pq = mul_vec(&self.ictcp_to_lms, [v.i, v.ct, v.cp]);
        let lms = pq.map(|c| pq_eotf_unchecked(c.clamp(0.0, 1.0)));
        mul_vec(&self.lms_to_xyz, lms)
    }
}

/// ΔE_ITP between two ICtCp samples.
pub fn delta_e_itp(a: &Ictcp, b: &Ictcp) -> f64 {
    let di = a.i - b.i;
    let dt = ITP_T_WEIGHT * (a.ct - b.ct);
    let dp = a.cp - b.cp;
    ITP_SCALE * libm::sqrt(di * di + dt * dt + dp * dp)
}

/// Circular hue difference in degrees, in [0, 180].
pub fn hue_diff(h1: f64, h2: f64) -> f64 {
    let d = libm::fmod((h1 - h2).abs(), 360.0);
    d.min(360.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::colorimetry::rgb_to_xyz_d65_matrix;

    #[test]
    fn hue_diff_examples() {
        assert_eq!(hue_diff(350.0, 10.0), 20.0);
        assert_eq!(hue_diff(42.0, 42.0), 0.0);
        assert_eq!(hue_diff(0.0, 180.0), 180.0);
        assert_eq!(hue_diff(10.0, 350.0), 20.0);
    }

    #[test]
    fn achromatic_axis() {
        let enc = IctcpEncoder::new();
        for nits in [0.001, 0.5, 48.0, 300.0, 4000.0] {
            let w = WhitePoint::D65.xyz();
            let (v, clamped) = enc.encode([w[0] * nits, w[1] * nits, w[2] * nits], 1.0);
            assert!(!clamped);
            assert!(v.ct.abs() < 1e-6 && v.cp.abs() < 1e-6, "{nits}: {v:?}");
            assert!(v.c < 1e-6);
        }
        let (zero, _) = enc.encode([0.0; 3], 1.0);
        assert_eq!(zero.i, 0.0);
        assert!(zero.c < 1e-12);
    }

    /// Published P3→XYZ and XYZ→BT.2020 matrices composed separately,
    /// followed by the BT.2100 steps written out by hand.
    #[test]
    fn saturated_p3_red_matches_two_step_oracle() {
        let p3_to_xyz = [
            [0.4865709, 0.2656677, 0.1982173],
            [0.2289746, 0.6917385, 0.0792869],
            [0.0000000, 0.0451134, 1.0439444],
        ];
        let xyz_to_2020 = [
            [1.7166512, -0.3556708, -0.2533663],
            [-0.6666844, 1.6164812, 0.0157685],
            [0.0176399, -0.0427706, 0.9421031],
        ];
        let rgb = [100.0 / 0.2289746, 0.0, 0.0];
        let xyz = mul_vec(&p3_to_xyz, rgb);
        let r2020 = mul_vec(&xyz_to_2020, xyz);
        let lms = [
            (1688.0 * r2020[0] + 2146.0 * r2020[1] + 262.0 * r2020[2]) / 4096.0,
            (683.0 * r2020[0] + 2951.0 * r2020[1] + 462.0 * r2020[2]) / 4096.0,
            (99.0 * r2020[0] + 309.0 * r2020[1] + 3688.0 * r2020[2]) / 4096.0,
        ];
        let pq = |l: f64| {
            let y = (l / 10000.0).powf(0.1593017578125);
            ((0.8359375 + 18.8515625 * y) / (1.0 + 18.6875 * y)).powf(78.84375)
        };
        let [l, m, s] = lms.map(pq);
        let want_i = 0.5 * l + 0.5 * m;
        let want_ct = (6610.0 * l - 13613.0 * m + 7003.0 * s) / 4096.0;
        let want_cp = (17933.0 * l - 17390.0 * m - 543.0 * s) / 4096.0;

        let m = rgb_to_xyz_d65_matrix(Primaries::P3D65, WhitePoint::D65).unwrap();
        let (got, clamped) = IctcpEncoder::new().encode(mul_vec(&m, rgb), 1.0);
        assert!(!clamped);
        assert!((got.i - want_i).abs() < 1e-6, "{} {}", got.i, want_i);
        assert!((got.ct - want_ct).abs() < 1e-6, "{} {}", got.ct, want_ct);
        assert!((got.cp - want_cp).abs() < 1e-6, "{} {}", got.cp, want_cp);
    }

    #[test]
    fn encode_decode_round_trip() {
        let enc = IctcpEncoder::new();
        let xyz = [40.0, 35.0, 20.0];
        let (v, _) = enc.encode(xyz, 1.0);
        let back = enc.decode(&v);
        for c in 0..3 {
            assert!((back[c] - xyz[c]).abs() / xyz[c] < 1e-9);
        }
    }

    #[test]
    fn negative_lms_is_clamped_and_flagged() {
        let (v, clamped) = IctcpEncoder::new().encode([-5.0, -5.0, -5.0], 1.0);
        assert!(clamped);
        assert_eq!(v.i, 0.0);
    }

    #[test]
    fn delta_e_basics() {
        let a = Ictcp::new(0.5, 0.01, -0.02);
        let b = Ictcp::new(0.48, 0.0, 0.01);
        assert_eq!(delta_e_itp(&a, &a), 0.0);
        assert_eq!(delta_e_itp(&a, &b), delta_e_itp(&b, &a));
        let want = 720.0 * (0.02f64.powi(2) + (0.5 * 0.01f64).powi(2) + 0.03f64.powi(2)).sqrt();
        assert!((delta_e_itp(&a, &b) - want).abs() < 1e-12);
    }

    #[test]
    fn hue_is_in_range() {
        let v = Ictcp::new(0.1, -1e-9, -0.0);
        assert!((0.0..360.0).contains(&v.h));
        assert!((Ictcp::new(0.1, 0.0, -1.0).h - 270.0).abs() < 1e-12);
    }
}
