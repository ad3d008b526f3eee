//! Published StEM2 full-film results, kept as reference constants.
//!
//! The source corpus cannot ship with this crate, so these numbers are not
//! reproduced by any test run. Ratios are fractions in [0, 1]; hue values
//! are degrees. Scene names match [`SceneCategory::name`] except Table 6's
//! "Hospital", which has no category of its own.
//!
//! [`SceneCategory::name`]: crate::ingest::SceneCategory::name

/// Frames in the test film.
pub const FILM_FRAMES: usize = 18_580;
/// Frames sampled for the decision maps.
pub const DECISION_FRAMES: usize = 91;
/// Full-film mean R² of the monotone SDR→HDR fit.
pub const FULL_FILM_MEAN_R2: f64 = 0.9986;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LuminanceRow {
    pub scene: &'static str,
    pub shots: usize,
    pub mean_r2: f64,
    pub min_r2: f64,
    pub gradient_rho: f64,
}

pub const TABLE1: [LuminanceRow; 7] = [
    LuminanceRow { scene: "Day Car Interior", shots: 57, mean_r2: 0.9995, min_r2: 0.9927, gradient_rho: 0.963 },
    LuminanceRow { scene: "Night Car Interior", shots: 21, mean_r2: 0.9993, min_r2: 0.9966, gradient_rho: 0.980 },
    LuminanceRow { scene: "Cave", shots: 39, mean_r2: 0.9963, min_r2: 0.9169, gradient_rho: 0.944 },
    LuminanceRow { scene: "Desert", shots: 32, mean_r2: 0.9990, min_r2: 0.9795, gradient_rho: 0.970 },
    LuminanceRow { scene: "Hybrid VFX", shots: 10, mean_r2: 0.9986, min_r2: 0.9942, gradient_rho: 0.970 },
    LuminanceRow { scene: "Night Interior", shots: 40, mean_r2: 0.9995, min_r2: 0.9965, gradient_rho: 0.980 },
    LuminanceRow { scene: "Smoke", shots: 5, mean_r2: 0.9992, min_r2: 0.9964, gradient_rho: 0.959 },
];

/// (pixel ratio, energy ratio) for Type I, II, III.
pub const TABLE2: [(f64, f64); 3] = [(0.183, 0.954), (0.319, 0.038), (0.499, 0.008)];

pub const MEAN_ABS_DH: f64 = 2.38;
pub const P95_ABS_DH: f64 = 6.52;
pub const CHROMA_CORRELATION: f64 = 0.9853;
/// Share of 20–100 cd/m² pixels where HDR chroma exceeds SDR chroma.
pub const ENHANCEMENT_MID: f64 = 0.669;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorBandRow {
    pub band: &'static str,
    pub mean_abs_dh: f64,
    pub p95_abs_dh: f64,
    pub mean_dc: f64,
    pub enhancement_ratio: f64,
    pub pixel_ratio: f64,
}

pub const TABLE4: [ColorBandRow; 3] = [
    ColorBandRow { band: "<20 cd/m²", mean_abs_dh: 2.5, p95_abs_dh: 5.8, mean_dc: -0.039, enhancement_ratio: 0.308, pixel_ratio: 0.858 },
    ColorBandRow { band: "20–100 cd/m²", mean_abs_dh: 3.9, p95_abs_dh: 9.2, mean_dc: 0.003, enhancement_ratio: 0.669, pixel_ratio: 0.118 },
    ColorBandRow { band: ">100 cd/m²", mean_abs_dh: 5.7, p95_abs_dh: 12.5, mean_dc: -0.008, enhancement_ratio: 0.344, pixel_ratio: 0.024 },
];

/// (scene, recovery, adjustment); the last row is the full-film average.
pub const TABLE5: [(&str, f64, f64); 8] = [
    ("Day Car Interior", 0.800, 0.200),
    ("Night Car Interior", 0.767, 0.233),
    ("Cave", 0.777, 0.223),
    ("Desert", 0.979, 0.021),
    ("Hybrid VFX", 0.844, 0.156),
    ("Night Interior", 0.796, 0.204),
    ("Smoke", 1.000, 0.000),
    ("Full Film Average", 0.824, 0.176),
];

/// (scene, EXR–HDR, HDR–SDR structural correlation).
pub const TABLE6: [(&str, f64, f64); 3] = [("Desert", 0.72, 0.993), ("Cave", 0.16, 0.888), ("Hospital", 0.85, 0.986)];
