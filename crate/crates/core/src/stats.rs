//! Small statistics kernels shared across the analysers. All reductions run
//! in 64-bit floating point in a fixed, index-ordered sequence.

use serde::{Deserialize, Serialize};

/// Arithmetic mean, `None` for an empty input.
pub fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut n = 0usize;
    let mut sum = 0.0;
    for v in values {
        n += 1;
        sum += v;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Pearson correlation of two equal-length samples, computed with centred
/// sums. `None` if either sample has zero variance or fewer than two points.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len(), "pearson requires paired samples");
    let n = a.len();
    if n < 2 {
        return None;
    }
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (libm::sqrt(saa) * libm::sqrt(sbb))).clamp(-1.0, 1.0))
}

/// Nearest-rank percentile (`p` in (0, 100]). Sorts `values` in place.
pub fn percentile_nearest_rank(values: &mut [f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    let rank = libm::ceil(p / 100.0 * n as f64) as usize;
    Some(values[rank.clamp(1, n) - 1])
}

/// Median (mean of the two central values for even counts). Sorts in place.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Mergeable bivariate moments for pooled Pearson correlation.
///
/// Merging uses the pairwise update of Chan et al.; results depend on the
/// merge order, so callers reduce in a fixed order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairMoments {
    pub n: u64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub m2_a: f64,
    pub m2_b: f64,
    pub co: f64,
}

impl PairMoments {
    pub fn from_samples(a: &[f64], b: &[f64]) -> Self {
        assert_eq!(a.len(), b.len());
        let n = a.len();
        if n == 0 {
            return Self::default();
        }
        let mean_a = a.iter().sum::<f64>() / n as f64;
        let mean_b = b.iter().sum::<f64>() / n as f64;
        let mut out = Self { n: n as u64, mean_a, mean_b, ..Self::default() };
        for (&x, &y) in a.iter().zip(b) {
            out.m2_a += (x - mean_a) * (x - mean_a);
            out.m2_b += (y - mean_b) * (y - mean_b);
            out.co += (x - mean_a) * (y - mean_b);
        }
        out
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n1 = self.n as f64;
        let n2 = other.n as f64;
        let n = n1 + n2;
        let da = other.mean_a - self.mean_a;
        let db = other.mean_b - self.mean_b;
        self.m2_a += other.m2_a + da * da * n1 * n2 / n;
        self.m2_b += other.m2_b + db * db * n1 * n2 / n;
        self.co += other.co + da * db * n1 * n2 / n;
        self.mean_a += da * n2 / n;
        self.mean_b += db * n2 / n;
        self.n += other.n;
    }

    pub fn correlation(&self) -> Option<f64> {
        if self.n < 2 || self.m2_a <= 0.0 || self.m2_b <= 0.0 {
            return None;
        }
        Some((self.co / libm::sqrt(self.m2_a * self.m2_b)).clamp(-1.0, 1.0))
    }
}
