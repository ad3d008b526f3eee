//! Global monotone luminance baseline, gradient-domain structural
//! correlation, luminance residuals and the residual taxonomy.

pub mod cluster;
pub mod gradient;
pub mod isotonic;
pub mod residual;

pub use cluster::{
    cluster_residuals, residual_summary, ClusterModel, EnergyMeasure, ResidualProfile, ResidualSummary, ResidualType,
};
pub use gradient::{gradient_correlation, mean_gradient, sobel_magnitude, GradientStats};
pub use isotonic::{fit_isotonic, log_luminance, pava, r_squared, BinAccumulator, MonotoneFit, DEFAULT_BINS, LUMINANCE_FLOOR};
pub use residual::{residual_energy, residual_features, residual_plane, ResidualEnergy, ResidualFeatures};

use crate::plane::Plane;

/// log10 luminance plane with the shared floor applied.
pub fn log_plane(luma: &Plane<f64>) -> Plane<f64> {
    luma.map(|&v| log_luminance(v))
}
