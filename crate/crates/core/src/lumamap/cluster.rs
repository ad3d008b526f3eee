//! z-scored k-means (k = 3) over per-frame residual features and the
//! Type I/II/III residual taxonomy.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::residual::{ResidualEnergy, ResidualFeatures};
use crate::{Error, Result};

pub const CLUSTERS: usize = 3;
pub const MAX_ITERATIONS: usize = 100;
pub const CONVERGENCE: f64 = 1e-9;

/// Residual regime of a frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ResidualType {
    /// Self-luminous highlights: highest residual energy.
    TypeI,
    /// Material-related structure: highest structure of the rest.
    TypeII,
    /// Explained by the global baseline.
    TypeIII,
}

impl ResidualType {
    pub const ALL: [ResidualType; 3] = [Self::TypeI, Self::TypeII, Self::TypeIII];

    pub fn label(&self) -> &'static str {
        match self {
            Self::TypeI => "Type I: Self-luminous Highlights",
            Self::TypeII => "Type II: Material-related Structural Regions",
            Self::TypeIII => "Type III: Global-baseline Regions",
        }
    }

    pub fn mechanism(&self) -> &'static str {
        match self {
            Self::TypeI => "Self-luminous extremes",
            Self::TypeII => "Material texture",
            Self::TypeIII => "General scenes",
        }
    }
}

impl fmt::Display for ResidualType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TypeI => "I",
            Self::TypeII => "II",
            Self::TypeIII => "III",
        })
    }
}

/// Fitted clustering of a set of frames.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    /// Centroids in z-scored (energy, structure) space.
    pub centroids: [[f64; 2]; CLUSTERS],
    pub seed: u64,
    /// Cluster index per input point.
    pub assignment: Vec<usize>,
    /// Residual type of each cluster (a bijection).
    pub type_map: [ResidualType; CLUSTERS],
    /// Per-dimension mean and standard deviation used for z-scoring.
    pub z_mean: [f64; 2],
    pub z_std: [f64; 2],
    pub iterations: usize,
}

impl ClusterModel {
    pub fn residual_type(&self, point: usize) -> ResidualType {
        self.type_map[self.assignment[point]]
    }

    pub fn types(&self) -> Vec<ResidualType> {
        self.assignment.iter().map(|&c| self.type_map[c]).collect()
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1])
}

/// z-score each feature dimension (population standard deviation; a
/// constant dimension maps to 0).
pub fn z_score(features: &[ResidualFeatures]) -> (Vec<[f64; 2]>, [f64; 2], [f64; 2]) {
    let n = features.len().max(1) as f64;
    let dims = |f: &ResidualFeatures| [f.e_p95, f.s_struct];
    let mut mean = [0.0; 2];
    for f in features {
        let v = dims(f);
        mean[0] += v[0];
        mean[1] += v[1];
    }
    mean = mean.map(|m| m / n);
    let mut var = [0.0; 2];
    for f in features {
        let v = dims(f);
        var[0] += (v[0] - mean[0]) * (v[0] - mean[0]);
        var[1] += (v[1] - mean[1]) * (v[1] - mean[1]);
    }
    let std = var.map(|v| libm::sqrt(v / n));
    let z = features
        .iter()
        .map(|f| {
            let v = dims(f);
            [0, 1].map(|d| if std[d] > 0.0 { (v[d] - mean[d]) / std[d] } else { 0.0 })
        })
        .collect();
    (z, mean, std)
}

/// Clusters per-frame residual features into three regimes.
///
/// Seeding picks the first centroid from `seed`, then greedily adds the
/// point farthest from the chosen centroids (lowest index on ties). Lloyd
/// iterations stop when no centroid moves by more than 1e-9 or after 100
/// rounds. Type I is the cluster with the largest energy centroid, Type II
/// the larger structure centroid of the remaining two.
pub fn cluster_residuals(features: &[ResidualFeatures], seed: u64) -> Result<ClusterModel> {
    if features.len() < CLUSTERS {
        return Err(Error::Clustering(format!("need at least {CLUSTERS} frames, got {}", features.len())));
    }
    if features.iter().any(|f| !f.e_p95.is_finite() || !f.s_struct.is_finite()) {
        return Err(Error::Clustering("non-finite residual feature".into()));
    }
    let (points, z_mean, z_std) = z_score(features);
    let mut distinct: Vec<[f64; 2]> = Vec::new();
    for p in &points {
        if !distinct.iter().any(|d| d == p) {
            distinct.push(*p);
            if distinct.len() >= CLUSTERS {
                break;
            }
        }
    }
    if distinct.len() < CLUSTERS {
        return Err(Error::Clustering(format!("only {} distinct feature points", distinct.len())));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<[f64; 2]> = alloc::vec![points[rng.random_range(0..points.len())]];
    while centroids.len() < CLUSTERS {
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (i, p) in points.iter().enumerate() {
            let d = centroids.iter().map(|c| dist2(*p, *c)).fold(f64::INFINITY, f64::min);
            if d > best.0 {
                best = (d, i);
            }
        }
        centroids.push(points[best.1]);
    }

    let mut assignment = alloc::vec![0usize; points.len()];
    let mut iterations = 0;
    loop {
        iterations += 1;
        for (i, p) in points.iter().enumerate() {
            let mut best = (f64::INFINITY, 0usize);
            for (c, cen) in centroids.iter().enumerate() {
                let d = dist2(*p, *cen);
                if d < best.0 {
                    best = (d, c);
                }
            }
            assignment[i] = best.1;
        }
        let mut sums = [[0.0f64; 2]; CLUSTERS];
        let mut counts = [0usize; CLUSTERS];
        for (p, &c) in points.iter().zip(&assignment) {
            sums[c][0] += p[0];
            sums[c][1] += p[1];
            counts[c] += 1;
        }
        let mut moved: f64 = 0.0;
        for c in 0..CLUSTERS {
            let next = if counts[c] > 0 {
                [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64]
            } else {
                // Re-seed an empty cluster at the point farthest from its centroid.
                let far = (0..points.len())
                    .max_by(|&a, &b| {
                        dist2(points[a], centroids[assignment[a]])
                            .total_cmp(&dist2(points[b], centroids[assignment[b]]))
                            .then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                points[far]
            };
            moved = moved.max(libm::sqrt(dist2(next, centroids[c])));
            centroids[c] = next;
        }
        if moved < CONVERGENCE || iterations >= MAX_ITERATIONS {
            break;
        }
    }
    // Final assignment against the converged centroids.
    for (i, p) in points.iter().enumerate() {
        let mut best = (f64::INFINITY, 0usize);
        for (c, cen) in centroids.iter().enumerate() {
            let d = dist2(*p, *cen);
            if d < best.0 {
                best = (d, c);
            }
        }
        assignment[i] = best.1;
    }

    let centroids = [centroids[0], centroids[1], centroids[2]];
    let type_i = (0..CLUSTERS)
        .max_by(|&a, &b| centroids[a][0].total_cmp(&centroids[b][0]).then(b.cmp(&a)))
        .expect("three clusters");
    let rest: Vec<usize> = (0..CLUSTERS).filter(|&c| c != type_i).collect();
    let (type_ii, type_iii) = if centroids[rest[1]][1] > centroids[rest[0]][1] {
        (rest[1], rest[0])
    } else {
        (rest[0], rest[1])
    };
    let mut type_map = [ResidualType::TypeIII; CLUSTERS];
    type_map[type_i] = ResidualType::TypeI;
    type_map[type_ii] = ResidualType::TypeII;
    type_map[type_iii] = ResidualType::TypeIII;

    Ok(ClusterModel { centroids, seed, assignment, type_map, z_mean, z_std, iterations })
}

/// Which residual mass the energy ratio is computed from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyMeasure {
    /// Σ|ΔL|
    #[default]
    Absolute,
    /// ΣΔL²
    Squared,
}

/// A frame's type label with its residual mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualProfile {
    pub features: ResidualFeatures,
    pub energy: ResidualEnergy,
    pub cluster: Option<usize>,
    pub residual_type: Option<ResidualType>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeShare {
    pub residual_type: ResidualType,
    pub frames: usize,
    pub pixel_ratio: f64,
    pub energy_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub rows: [TypeShare; 3],
    pub measure: EnergyMeasure,
    /// Set when the total residual mass was zero and energy ratios were
    /// reported as 0.
    pub zero_energy: bool,
    /// Profiles skipped because they carried no type label.
    pub unlabelled: usize,
}

/// Pixel and energy share per residual type.
pub fn residual_summary(profiles: &[ResidualProfile], measure: EnergyMeasure) -> ResidualSummary {
    let mut pixels = [0u64; 3];
    let mut energy = [0.0f64; 3];
    let mut frames = [0usize; 3];
    let mut unlabelled = 0;
    for p in profiles {
        let Some(t) = p.residual_type else {
            unlabelled += 1;
            continue;
        };
        let k = t as usize;
        pixels[k] += p.energy.pixels;
        frames[k] += 1;
        energy[k] += match measure {
            EnergyMeasure::Absolute => p.energy.abs_sum,
            EnergyMeasure::Squared => p.energy.sq_sum,
        };
    }
    let total_px: u64 = pixels.iter().sum();
    let total_e: f64 = energy.iter().sum();
    let zero_energy = total_e <= 0.0;
    let rows = ResidualType::ALL.map(|t| {
        let k = t as usize;
        TypeShare {
            residual_type: t,
            frames: frames[k],
            pixel_ratio: if total_px > 0 { pixels[k] as f64 / total_px as f64 } else { 0.0 },
            energy_ratio: if zero_energy { 0.0 } else { energy[k] / total_e },
        }
    });
    ResidualSummary { rows, measure, zero_energy, unlabelled }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(seed: u64) -> (Vec<ResidualFeatures>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = [(120.0, 3.0), (6.0, 9.0), (0.3, 0.2)];
        let mut f = Vec::new();
        let mut truth = Vec::new();
        for i in 0..60 {
            let b = i % 3;
            let (e, s) = centers[b];
            f.push(ResidualFeatures {
                e_p95: e * (1.0 + rng.random_range(-0.05..0.05)),
                s_struct: s * (1.0 + rng.random_range(-0.05..0.05)),
            });
            truth.push(b);
        }
        (f, truth)
    }

    #[test]
    fn well_separated_blobs_are_recovered() {
        let (f, truth) = blobs(1);
        let m = cluster_residuals(&f, 42).unwrap();
        let want = [ResidualType::TypeI, ResidualType::TypeII, ResidualType::TypeIII];
        for (i, &b) in truth.iter().enumerate() {
            assert_eq!(m.residual_type(i), want[b]);
        }
        let mut seen = m.type_map.to_vec();
        seen.sort();
        assert_eq!(seen, ResidualType::ALL.to_vec());
    }

    #[test]
    fn deterministic_for_seed() {
        let (f, _) = blobs(2);
        assert_eq!(cluster_residuals(&f, 7).unwrap(), cluster_residuals(&f, 7).unwrap());
    }

    #[test]
    fn too_few_points() {
        let f = [ResidualFeatures { e_p95: 1.0, s_struct: 1.0 }; 5];
        assert!(matches!(cluster_residuals(&f, 0), Err(Error::Clustering(_))));
        assert!(cluster_residuals(&f[..2], 0).is_err());
    }

    #[test]
    fn summary_energy_split() {
        let mk = |t, pixels, abs_sum| ResidualProfile {
            features: ResidualFeatures::default(),
            energy: ResidualEnergy { pixels, abs_sum, sq_sum: abs_sum * abs_sum },
            cluster: Some(0),
            residual_type: Some(t),
        };
        let s = residual_summary(&[mk(ResidualType::TypeI, 50, 90.0), mk(ResidualType::TypeII, 50, 10.0)], EnergyMeasure::Absolute);
        assert!((s.rows[0].energy_ratio - 0.9).abs() < 1e-12);
        assert!((s.rows[1].energy_ratio - 0.1).abs() < 1e-12);
        assert_eq!(s.rows[2].energy_ratio, 0.0);
        assert!((s.rows.iter().map(|r| r.pixel_ratio).sum::<f64>() - 1.0).abs() < 1e-12);

        let z = residual_summary(&[mk(ResidualType::TypeIII, 10, 0.0)], EnergyMeasure::Absolute);
        assert!(z.zero_energy);
        assert_eq!(z.rows[2].pixel_ratio, 1.0);
        assert_eq!(z.rows[2].energy_ratio, 0.0);
    }
}
