//! SMPTE ST 2084 (PQ) and pure power-law transfer functions.

use crate::{Error, Result};

/// PQ exponent m1 = 2610/16384
pub const PQ_M1: f64 = 2610.0 / 16384.0;
/// PQ exponent m2 = 2523/4096 * 128
pub const PQ_M2: f64 = 2523.0 / 4096.0 * 128.0;
/// PQ constant c1 = 3424/4096
pub const PQ_C1: f64 = 3424.0 / 4096.0;
/// PQ constant c2 = 2413/4096 * 32
pub const PQ_C2: f64 = 2413.0 / 4096.0 * 32.0;
/// PQ constant c3 = 2392/4096 * 32
pub const PQ_C3: f64 = 2392.0 / 4096.0 * 32.0;

/// Absolute luminance of PQ code 1.0, cd/m².
pub const PQ_PEAK: f64 = 10_000.0;

/// SDR cinema mastering peak, cd/m².
pub const SDR_CINEMA_PEAK: f64 = 48.0;
/// HDR cinema mastering ceiling, cd/m².
pub const HDR_CINEMA_PEAK: f64 = 300.0;

pub const CINEMA_GAMMA: f64 = 2.6;

fn check_code(code: f64) -> Result<()> {
    if (0.0..=1.0).contains(&code) {
        Ok(())
    } else {
        Err(Error::Range { what: "signal code", value: code })
    }
}

/// PQ EOTF without range checks; callers guarantee `code` in [0, 1].
#[inline]
pub(crate) fn pq_eotf_unchecked(code: f64) -> f64 {
    let e = libm::pow(code, 1.0 / PQ_M2);
    let num = (e - PQ_C1).max(0.0);
    let den = PQ_C2 - PQ_C3 * e;
    PQ_PEAK * libm::pow(num / den, 1.0 / PQ_M1)
}

/// Inverse PQ EOTF without range checks; callers guarantee `nits` in
/// [0, 10000].
#[inline]
pub(crate) fn pq_inverse_unchecked(nits: f64) -> f64 {
    if nits <= 0.0 {
        return 0.0;
    }
    let y = libm::pow(nits / PQ_PEAK, PQ_M1);
    libm::pow((PQ_C1 + PQ_C2 * y) / (1.0 + PQ_C3 * y), PQ_M2)
}

/// ST 2084 EOTF: normalised code in [0, 1] to absolute luminance in cd/m².
pub fn pq_eotf(code: f64) -> Result<f64> {
    check_code(code)?;
    Ok(pq_eotf_unchecked(code))
}

/// Inverse ST 2084 EOTF: luminance in [0, 10000] cd/m² to normalised code.
///
/// Zero luminance maps to code 0 exactly; the closed form would return
/// `c1^m2` (about 7e-7) there.
pub fn pq_inverse_eotf(nits: f64) -> Result<f64> {
    if !(0.0..=PQ_PEAK).contains(&nits) {
        return Err(Error::Range { what: "PQ luminance", value: nits });
    }
    Ok(pq_inverse_unchecked(nits))
}

/// Pure power-law 2.6 decode scaled to `peak` cd/m².
pub fn gamma26_decode(code: f64, peak: f64) -> Result<f64> {
    check_code(code)?;
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::Range { what: "display peak", value: peak });
    }
    Ok(peak * libm::pow(code, CINEMA_GAMMA))
}

/// Inverse of [`gamma26_decode`].
pub fn gamma26_encode(nits: f64, peak: f64) -> Result<f64> {
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::Range { what: "display peak", value: peak });
    }
    if !(0.0..=peak).contains(&nits) {
        return Err(Error::Range { what: "gamma luminance", value: nits });
    }
    Ok(libm::pow(nits / peak, 1.0 / CINEMA_GAMMA))
}

/// HDR cinema master decode: PQ EOTF. Values above the 300 cd/m² mastering
/// ceiling are legal signal and are only counted by frame diagnostics.
pub fn hdr_decode(code: f64) -> Result<f64> {
    pq_eotf(code)
}
