//! Per-frame JSON records and the CSV tables derived from them.
//!
//! Frame values are averaged within each shot; scene values are
//! arithmetic means over the scene's shots. Minima are taken over frames.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use hdrtriad_core::chromastats::{ColorAccumulator, ColorMetrics, SaturationHistogram, HUE_HIST_STEP};
use hdrtriad_core::decision::{summarize_decisions, AnchorGain, DecisionCounts};
use hdrtriad_core::ingest::{FrameDiagnostics, SceneCategory};
use hdrtriad_core::lumamap::{EnergyMeasure, ResidualEnergy, ResidualFeatures, ResidualProfile, ResidualType, residual_summary};
use hdrtriad_core::pipeline::LumaDensity;
use hdrtriad_core::ActiveArea;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

pub const FULL_FILM: &str = "Full Film Average";

pub const TABLE1: &str = "table1_luminance.csv";
pub const SHOTS_LUMINANCE: &str = "shots_luminance.csv";
pub const TABLE2: &str = "table2_residuals.csv";
pub const TABLE3: &str = "table3_color.csv";
pub const TABLE4: &str = "table4_color_bins.csv";
pub const TABLE5: &str = "table5_decisions.csv";
pub const NEUTRAL: &str = "decision_neutral.csv";
pub const TABLE6: &str = "table6_structure.csv";
pub const SHOTS_STRUCTURE: &str = "shots_structure.csv";
pub const HUE_HIST: &str = "hue_histogram.csv";
pub const SAT_HIST: &str = "saturation_histogram.csv";
pub const ANALYSIS_FRAMES: &str = "analysis_frames.json";
pub const ANALYSIS_POOLED: &str = "analysis_pooled.json";
pub const DECISION_FRAMES: &str = "decision_frames.json";

pub const TABLE1_HEADER: [&str; 5] =
    ["Scene", "Number of Shots", "Mean (R²)", "Minimum (R²)", "Gradient Correlation (ρ)"];
pub const TABLE2_HEADER: [&str; 4] = ["Type", "Pixel Ratio", "Energy Ratio", "Physical Mechanism"];
pub const TABLE3_HEADER: [&str; 3] = ["Metric", "Value", "Meaning"];
pub const TABLE4_HEADER: [&str; 6] = [
    "Luminance Bin (HDR)",
    "Mean Hue Diff (|Δh|)",
    "P95 Hue Diff",
    "Mean Chroma Change (ΔC)",
    "Saturation Enhancement Ratio",
    "Pixel Ratio",
];
pub const TABLE5_HEADER: [&str; 3] =
    ["Scene", "EXR-Closer Recovery (Green)", "Content-Adaptive Adjustment (Red)"];
pub const TABLE6_HEADER: [&str; 4] = ["Scene", "Corr. (EXR–HDR)", "Corr. (HDR–SDR)", "Notes"];

/// Luminance and colour results for one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub shot: String,
    pub scene: SceneCategory,
    pub frame: u32,
    pub pixels: usize,
    pub active: ActiveArea,
    pub r_squared: Option<f64>,
    pub gradient_rho: Option<f64>,
    pub features: ResidualFeatures,
    pub energy: ResidualEnergy,
    /// Filled in after clustering the whole run.
    pub residual_type: Option<ResidualType>,
    pub cluster: Option<usize>,
    pub color: ColorMetrics,
    pub ictcp_clamped: usize,
    pub diagnostics: FrameDiagnostics,
}

/// Anchored decision results for one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub shot: String,
    pub scene: SceneCategory,
    pub frame: u32,
    pub gain: AnchorGain,
    pub threshold: f64,
    pub counts: DecisionCounts,
    pub recovery_ratio: Option<f64>,
    pub adjustment_ratio: Option<f64>,
    pub neutral_fraction: Option<f64>,
    pub exr_hdr: Option<f64>,
    pub hdr_sdr: Option<f64>,
    pub map: String,
    pub diagnostics: FrameDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameFailure {
    pub shot: String,
    pub frame: u32,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordFile<T> {
    pub seed: u64,
    pub records: Vec<T>,
    pub failures: Vec<FrameFailure>,
}

/// One (log L_S, f̂) knot of the pooled baseline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineKnot {
    pub log_sdr: f64,
    pub hdr: f64,
    pub weight: u64,
}

/// Corpus-pooled histograms behind Tables 3–4 and the plots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PooledFile {
    pub seed: u64,
    pub pixels: u64,
    pub baseline: Vec<BaselineKnot>,
    pub density: LumaDensity,
    pub color: ColorAccumulator,
    pub saturation: SaturationHistogram,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Full-precision, round-trippable number; empty when undefined.
pub fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub fn write_csv<const N: usize>(path: &Path, header: [&str; N], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for v in values {
        s += v;
        n += 1;
    }
    (n > 0).then(|| s / n as f64)
}

fn min(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    values.into_iter().fold(None, |m, v| Some(m.map_or(v, |m: f64| m.min(v))))
}

/// Groups items by shot, preserving first-appearance order.
fn by_shot<'a, T>(items: &'a [T], key: impl Fn(&T) -> (&str, SceneCategory)) -> Vec<(String, SceneCategory, Vec<&'a T>)> {
    let mut out: Vec<(String, SceneCategory, Vec<&T>)> = Vec::new();
    for it in items {
        let (shot, scene) = key(it);
        match out.iter_mut().find(|(s, _, _)| s == shot) {
            Some(e) => e.2.push(it),
            None => out.push((shot.to_string(), scene, vec![it])),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShotLuminance {
    pub shot: String,
    pub scene: SceneCategory,
    pub frames: usize,
    pub mean_r2: Option<f64>,
    pub min_r2: Option<f64>,
    pub rho: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneLuminance {
    pub scene: String,
    pub shots: usize,
    pub mean_r2: Option<f64>,
    pub min_r2: Option<f64>,
    pub rho: Option<f64>,
}

pub fn shot_luminance(records: &[AnalysisRecord]) -> Vec<ShotLuminance> {
    by_shot(records, |r| (&r.shot, r.scene))
        .into_iter()
        .map(|(shot, scene, rs)| ShotLuminance {
            shot,
            scene,
            frames: rs.len(),
            mean_r2: mean(rs.iter().filter_map(|r| r.r_squared)),
            min_r2: min(rs.iter().filter_map(|r| r.r_squared)),
            rho: mean(rs.iter().filter_map(|r| r.gradient_rho)),
        })
        .collect()
}

fn scene_luminance_row(name: String, shots: &[&ShotLuminance]) -> SceneLuminance {
    SceneLuminance {
        scene: name,
        shots: shots.len(),
        mean_r2: mean(shots.iter().filter_map(|s| s.mean_r2)),
        min_r2: min(shots.iter().filter_map(|s| s.min_r2)),
        rho: mean(shots.iter().filter_map(|s| s.rho)),
    }
}

/// Table 1 rows in scene-category order followed by the full-film row.
pub fn scene_luminance(shots: &[ShotLuminance]) -> Vec<SceneLuminance> {
    let mut groups: BTreeMap<SceneCategory, Vec<&ShotLuminance>> = BTreeMap::new();
    for s in shots {
        groups.entry(s.scene).or_default().push(s);
    }
    let mut rows: Vec<SceneLuminance> =
        groups.into_iter().map(|(scene, ss)| scene_luminance_row(scene.name().to_string(), &ss)).collect();
    let all: Vec<&ShotLuminance> = shots.iter().collect();
    rows.push(scene_luminance_row(FULL_FILM.to_string(), &all));
    rows
}

pub fn write_luminance_tables(dir: &Path, records: &[AnalysisRecord]) -> Result<()> {
    let shots = shot_luminance(records);
    let shot_rows: Vec<Vec<String>> = shots
        .iter()
        .map(|s| {
            vec![s.shot.clone(), s.scene.name().into(), s.frames.to_string(), num(s.mean_r2), num(s.min_r2), num(s.rho)]
        })
        .collect();
    write_csv(
        &dir.join(SHOTS_LUMINANCE),
        ["Shot", "Scene", "Frames", "Mean (R²)", "Minimum (R²)", "Gradient Correlation (ρ)"],
        &shot_rows,
    )?;
    let rows: Vec<Vec<String>> = scene_luminance(&shots)
        .into_iter()
        .map(|r| vec![r.scene, r.shots.to_string(), num(r.mean_r2), num(r.min_r2), num(r.rho)])
        .collect();
    write_csv(&dir.join(TABLE1), TABLE1_HEADER, &rows)
}

pub fn write_residual_table(dir: &Path, records: &[AnalysisRecord], measure: EnergyMeasure) -> Result<()> {
    let profiles: Vec<ResidualProfile> = records
        .iter()
        .map(|r| ResidualProfile {
            features: r.features,
            energy: r.energy,
            cluster: r.cluster,
            residual_type: r.residual_type,
        })
        .collect();
    let summary = residual_summary(&profiles, measure);
    let rows: Vec<Vec<String>> = summary
        .rows
        .iter()
        .map(|t| {
            vec![
                t.residual_type.label().into(),
                num(Some(t.pixel_ratio)),
                num(Some(t.energy_ratio)),
                t.residual_type.mechanism().into(),
            ]
        })
        .collect();
    write_csv(&dir.join(TABLE2), TABLE2_HEADER, &rows)
}

pub fn write_color_tables(dir: &Path, m: &ColorMetrics) -> Result<()> {
    let g = &m.global;
    let t3 = vec![
        vec![
            "Hue Stability (Mean |Δh|)".into(),
            num(g.mean_abs_dh),
            "Mean absolute ICtCp hue-angle difference between SDR and HDR, degrees".into(),
        ],
        vec![
            "Hue Outliers (P95 |Δh|)".into(),
            num(g.p95_abs_dh),
            "Nearest-rank 95th percentile of the absolute hue-angle difference, degrees".into(),
        ],
        vec!["Chroma Correlation".into(), num(g.chroma_corr), "Pearson correlation of SDR and HDR chroma".into()],
        vec![
            "Saturation Enhancement Ratio (20–100 cd/m²)".into(),
            num(g.enhancement_mid),
            "Share of chromatic pixels in the 20–100 cd/m² HDR band with higher HDR chroma".into(),
        ],
    ];
    write_csv(&dir.join(TABLE3), TABLE3_HEADER, &t3)?;
    let t4: Vec<Vec<String>> = m
        .bands
        .iter()
        .map(|b| {
            vec![
                b.band.label().into(),
                num(b.mean_abs_dh),
                num(b.p95_abs_dh),
                num(b.mean_dc),
                num(b.enhancement_ratio),
                num(Some(b.pixel_ratio)),
            ]
        })
        .collect();
    write_csv(&dir.join(TABLE4), TABLE4_HEADER, &t4)
}

pub fn write_histograms(dir: &Path, color: &ColorAccumulator, sat: &SaturationHistogram) -> Result<()> {
    let hue: Vec<Vec<String>> = color
        .hue_histogram()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, c)| vec![num(Some(i as f64 * HUE_HIST_STEP)), c.to_string()])
        .collect();
    write_csv(&dir.join(HUE_HIST), ["abs_dh_deg", "count"], &hue)?;
    let (lo, hi) = sat.log_lum_range;
    let width = (hi - lo) / sat.lum_bins as f64;
    let mut cells = Vec::new();
    for row in 0..sat.dc_bins {
        for col in 0..sat.lum_bins {
            let c = sat.counts[row * sat.lum_bins + col];
            if c > 0 {
                cells.push(vec![
                    num(Some(lo + width * col as f64)),
                    num(Some(lo + width * (col + 1) as f64)),
                    num(Some(sat.dc_center(row))),
                    c.to_string(),
                ]);
            }
        }
    }
    write_csv(&dir.join(SAT_HIST), ["log10_lum_lo", "log10_lum_hi", "delta_c", "count"], &cells)
}

pub fn write_decision_tables(dir: &Path, records: &[DecisionRecord]) -> Result<()> {
    let summary = summarize_decisions(records.iter().map(|r| (r.scene, r.counts)));
    let mut t5 = Vec::new();
    let mut neutral = Vec::new();
    let rows = summary.scenes.iter().map(|s| (s.scene.name(), s.counts)).chain([(FULL_FILM, summary.full)]);
    for (name, c) in rows {
        t5.push(vec![name.to_string(), num(c.recovery_ratio()), num(c.adjustment_ratio())]);
        neutral.push(vec![name.to_string(), num(c.neutral_fraction()), c.neutral.to_string(), c.decided().to_string()]);
    }
    write_csv(&dir.join(TABLE5), TABLE5_HEADER, &t5)?;
    write_csv(&dir.join(NEUTRAL), ["Scene", "Neutral Fraction", "Neutral Pixels", "Decided Pixels"], &neutral)?;

    let shots = by_shot(records, |r| (&r.shot, r.scene));
    struct ShotCorr {
        scene: SceneCategory,
        frames: usize,
        gain: f64,
        exr_hdr: Option<f64>,
        hdr_sdr: Option<f64>,
    }
    let shot_corr: Vec<ShotCorr> = shots
        .iter()
        .map(|(_, scene, rs)| ShotCorr {
            scene: *scene,
            frames: rs.len(),
            gain: mean(rs.iter().map(|r| r.gain.gain)).unwrap_or(0.0),
            exr_hdr: mean(rs.iter().filter_map(|r| r.exr_hdr)),
            hdr_sdr: mean(rs.iter().filter_map(|r| r.hdr_sdr)),
        })
        .collect();
    let shot_rows: Vec<Vec<String>> = shots
        .iter()
        .zip(&shot_corr)
        .map(|((id, scene, _), c)| {
            vec![id.clone(), scene.name().into(), c.frames.to_string(), num(c.exr_hdr), num(c.hdr_sdr), num(Some(c.gain))]
        })
        .collect();
    write_csv(
        &dir.join(SHOTS_STRUCTURE),
        ["Shot", "Scene", "Frames", "Corr. (EXR–HDR)", "Corr. (HDR–SDR)", "Anchor Gain"],
        &shot_rows,
    )?;
    let mut groups: BTreeMap<SceneCategory, Vec<&ShotCorr>> = BTreeMap::new();
    for c in &shot_corr {
        groups.entry(c.scene).or_default().push(c);
    }
    let t6: Vec<Vec<String>> = groups
        .into_iter()
        .map(|(scene, cs)| {
            let frames: usize = cs.iter().map(|c| c.frames).sum();
            let gain = mean(cs.iter().map(|c| c.gain)).unwrap_or(0.0);
            vec![
                scene.name().into(),
                num(mean(cs.iter().filter_map(|c| c.exr_hdr))),
                num(mean(cs.iter().filter_map(|c| c.hdr_sdr))),
                format!("{} shots, {frames} frames; mean anchor gain {gain:.4}", cs.len()),
            ]
        })
        .collect();
    write_csv(&dir.join(TABLE6), TABLE6_HEADER, &t6)
}
