//! Binned isotonic regression of HDR luminance on SDR luminance.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::plane::{ActiveArea, Plane};
use crate::{Error, Result};

/// Luminance floor applied before taking log10, cd/m².
pub const LUMINANCE_FLOOR: f64 = 1e-4;

/// Default number of log-luminance bins.
pub const DEFAULT_BINS: usize = 4096;

#[inline]
pub fn log_luminance(l: f64) -> f64 {
    libm::log10(l.max(LUMINANCE_FLOOR))
}

/// Weighted pool-adjacent-violators: the non-decreasing sequence minimising
/// `Σ w_i (y_i − f_i)²`. Weights must be positive.
pub fn pava(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len(), "pava requires one weight per value");
    // (weighted mean, total weight, element count) per pooled block
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&y, &w) in values.iter().zip(weights) {
        let mut cur = (y, w, 1usize);
        while let Some(&(m, bw, n)) = blocks.last() {
            if m <= cur.0 {
                break;
            }
            blocks.pop();
            let tw = bw + cur.1;
            cur = ((m * bw + cur.0 * cur.1) / tw, tw, n + cur.2);
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(values.len());
    for (m, _, n) in blocks {
        out.extend(core::iter::repeat(m).take(n));
    }
    out
}

/// The fitted monotone baseline f̂: a non-decreasing function of
/// log10(L_S) sampled at one knot per log-luminance bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneFit {
    /// `bins + 1` log10 boundaries.
    pub bin_edges: Vec<f64>,
    /// Knot abscissa per bin: mean log10(L_S) of the bin's pixels, or the
    /// bin midpoint for empty bins.
    pub centers: Vec<f64>,
    /// f̂ per bin in cd/m², non-decreasing.
    pub fitted_values: Vec<f64>,
    /// Pixel count per bin.
    pub weights: Vec<u64>,
    /// R² over pixels; `None` when undefined (constant L_H or a
    /// degenerate single-value fit).
    pub r_squared: Option<f64>,
    /// Observed (min, max) of L_S in cd/m².
    pub domain: (f64, f64),
}

impl MonotoneFit {
    pub fn bins(&self) -> usize {
        self.fitted_values.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum()
    }

    /// f̂(L_S): linear interpolation between bin knots in log10(L_S),
    /// clamped to the end knots outside the fitted domain.
    pub fn evaluate(&self, sdr_nits: f64) -> f64 {
        let n = self.fitted_values.len();
        if n == 1 {
            return self.fitted_values[0];
        }
        let x = log_luminance(sdr_nits);
        let lo = self.bin_edges[0];
        let hi = self.bin_edges[n];
        let k = if hi > lo { libm::floor(((x - lo) / (hi - lo)) * n as f64).clamp(0.0, (n - 1) as f64) as usize } else { 0 };
        let (a, b) = if x < self.centers[k] {
            if k == 0 {
                return self.fitted_values[0];
            }
            (k - 1, k)
        } else {
            if k == n - 1 {
                return self.fitted_values[n - 1];
            }
            (k, k + 1)
        };
        let (xa, xb) = (self.centers[a], self.centers[b]);
        let (ya, yb) = (self.fitted_values[a], self.fitted_values[b]);
        if xb <= xa {
            return yb;
        }
        let t = ((x - xa) / (xb - xa)).clamp(0.0, 1.0);
        ya + t * (yb - ya)
    }

    /// f̂ applied to every pixel of an L_S plane.
    pub fn predict(&self, sdr: &Plane<f64>) -> Plane<f64> {
        sdr.map(|&v| self.evaluate(v))
    }
}

/// Coefficient of determination of `predicted` against `hdr` over the
/// area. `None` when L_H has zero variance there.
pub fn r_squared(hdr: &Plane<f64>, predicted: &Plane<f64>, area: &ActiveArea) -> Option<f64> {
    let stride = hdr.width();
    let n = area.pixel_count();
    if n == 0 {
        return None;
    }
    let mean = area.indices(stride).map(|i| hdr.data()[i]).sum::<f64>() / n as f64;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for i in area.indices(stride) {
        let y = hdr.data()[i];
        let r = y - predicted.data()[i];
        ss_res += r * r;
        ss_tot += (y - mean) * (y - mean);
    }
    (ss_tot > 0.0).then(|| 1.0 - ss_res / ss_tot)
}

/// Per-bin sufficient statistics for a binned isotonic fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinAccumulator {
    pub lo: f64,
    pub hi: f64,
    pub count: Vec<u64>,
    pub sum_log_sdr: Vec<f64>,
    pub sum_hdr: Vec<f64>,
}

impl BinAccumulator {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(bins >= 1 && hi >= lo);
        Self {
            lo,
            hi,
            count: alloc::vec![0; bins],
            sum_log_sdr: alloc::vec![0.0; bins],
            sum_hdr: alloc::vec![0.0; bins],
        }
    }

    pub fn bins(&self) -> usize {
        self.count.len()
    }

    #[inline]
    pub fn bin_of(&self, log_sdr: f64) -> usize {
        let n = self.bins();
        if self.hi <= self.lo {
            return 0;
        }
        let t = (log_sdr - self.lo) / (self.hi - self.lo);
        (libm::floor(t * n as f64).max(0.0) as usize).min(n - 1)
    }

    #[inline]
    pub fn add(&mut self, sdr_nits: f64, hdr_nits: f64) {
        let x = log_luminance(sdr_nits);
        let k = self.bin_of(x);
        self.count[k] += 1;
        self.sum_log_sdr[k] += x;
        self.sum_hdr[k] += hdr_nits;
    }

    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.bins(), other.bins());
        for k in 0..self.bins() {
            self.count[k] += other.count[k];
            self.sum_log_sdr[k] += other.sum_log_sdr[k];
            self.sum_hdr[k] += other.sum_hdr[k];
        }
    }

    /// Runs weighted PAVA on the non-empty bin means.
    pub fn fit(&self, domain: (f64, f64)) -> Result<MonotoneFit> {
        let n = self.bins();
        let occupied: Vec<usize> = (0..n).filter(|&k| self.count[k] > 0).collect();
        if occupied.is_empty() {
            return Err(Error::EmptyInput("no valid pixels to fit"));
        }
        let means: Vec<f64> = occupied.iter().map(|&k| self.sum_hdr[k] / self.count[k] as f64).collect();
        let weights: Vec<f64> = occupied.iter().map(|&k| self.count[k] as f64).collect();
        let pooled = pava(&means, &weights);

        let width = (self.hi - self.lo) / n as f64;
        let bin_edges: Vec<f64> = (0..=n).map(|k| self.lo + width * k as f64).collect();
        let mut centers: Vec<f64> = (0..n).map(|k| self.lo + width * (k as f64 + 0.5)).collect();
        for &k in &occupied {
            centers[k] = self.sum_log_sdr[k] / self.count[k] as f64;
        }
        let mut fitted_values = alloc::vec![0.0; n];
        for (j, &k) in occupied.iter().enumerate() {
            fitted_values[k] = pooled[j];
        }
        // Empty bins take the interpolant through the neighbouring knots.
        let mut next = 0usize;
        for k in 0..n {
            if self.count[k] > 0 {
                continue;
            }
            while next < occupied.len() && occupied[next] < k {
                next += 1;
            }
            fitted_values[k] = match (next.checked_sub(1).map(|p| occupied[p]), occupied.get(next)) {
                (Some(a), Some(&b)) => {
                    let t = ((centers[k] - centers[a]) / (centers[b] - centers[a])).clamp(0.0, 1.0);
                    fitted_values[a] + t * (fitted_values[b] - fitted_values[a])
                }
                (Some(a), None) => fitted_values[a],
                (None, Some(&b)) => fitted_values[b],
                (None, None) => unreachable!("occupied is non-empty"),
            };
        }
        debug_assert!(fitted_values.windows(2).all(|w| w[0] <= w[1]));
        Ok(MonotoneFit {
            bin_edges,
            centers,
            fitted_values,
            weights: self.count.clone(),
            r_squared: None,
            domain,
        })
    }
}

/// Fits the monotone SDR→HDR luminance baseline over the active area and
/// scores it with pixel-level R².
///
/// A frame with a single distinct L_S value yields a constant one-bin fit
/// whose R² is `None`.
pub fn fit_isotonic(sdr: &Plane<f64>, hdr: &Plane<f64>, area: &ActiveArea, bins: usize) -> Result<MonotoneFit> {
    if !sdr.same_shape(hdr) {
        return Err(Error::Registration("SDR and HDR luminance planes differ in size".into()));
    }
    if bins == 0 {
        return Err(Error::Config("bin count must be at least 1".into()));
    }
    if area.is_empty() {
        return Err(Error::EmptyInput("active area is empty"));
    }
    let stride = sdr.width();
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in area.indices(stride) {
        let v = sdr.data()[i];
        min = min.min(v);
        max = max.max(v);
    }
    let (lo, hi) = (log_luminance(min), log_luminance(max));
    let degenerate = hi <= lo;
    let mut acc = BinAccumulator::new(lo, hi, if degenerate { 1 } else { bins });
    for i in area.indices(stride) {
        acc.add(sdr.data()[i], hdr.data()[i]);
    }
    let mut fit = acc.fit((min, max))?;
    assert!(
        fit.fitted_values.windows(2).all(|w| w[0] <= w[1]),
        "isotonic fit must be non-decreasing"
    );
    if !degenerate {
        fit.r_squared = r_squared(hdr, &fit.predict(sdr), area);
    }
    Ok(fit)
}
