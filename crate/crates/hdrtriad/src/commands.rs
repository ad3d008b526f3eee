//! The `analyze`, `decide`, `plot`, `synth` and `report` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hdrtriad_core::decision::{render_decision, DecisionLabel};
use hdrtriad_core::ingest::{sample_frames, FrameKey, Quota};
use hdrtriad_core::lumamap::{cluster_residuals, EnergyMeasure, ResidualFeatures};
use hdrtriad_core::pipeline::{analyze_frame, decide_frame, AnalysisConfig, DecisionConfig, PooledPartials};
use hdrtriad_core::synth::verify::{verify, FrameObservation, Tolerances, VerifyReport};
use hdrtriad_core::{lumamap::MonotoneFit, ActiveArea, Plane};
use hdrtriad_core::codec::Ictcp;
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::corpus::{self, CorpusSpec};
use crate::manifest::{load_manifest, load_triplet, LoadedManifest};
use crate::plot::{self, LogAxes, PlotKind, PlotSummary};
use crate::report::{self, AnalysisRecord, BaselineKnot, DecisionRecord, FrameFailure, PooledFile, RecordFile};
use crate::{exec, io, ConfigError, EXIT_OK, EXIT_PARTIAL};

pub const TOOL: &str = concat!("hdrtriad ", env!("CARGO_PKG_VERSION"));

/// How a run ended, for the process exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub frames: usize,
    pub failed: usize,
    /// Set by verification runs.
    pub verified: Option<bool>,
}

impl Outcome {
    /// More than 10% failed frames, or a failed verification, is a partial
    /// failure.
    pub fn exit_code(&self) -> i32 {
        if self.failed * 10 > self.frames || self.verified == Some(false) {
            EXIT_PARTIAL
        } else {
            EXIT_OK
        }
    }
}

/// Summed per-frame sanitisation counters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticTotals {
    pub nonfinite_exr: usize,
    pub clamped_codes: usize,
    pub hdr_above_ceiling: usize,
    pub ictcp_clamped: usize,
    pub frames_with_warnings: usize,
}

impl DiagnosticTotals {
    fn add(&mut self, d: &hdrtriad_core::ingest::FrameDiagnostics, ictcp_clamped: usize) {
        self.nonfinite_exr += d.nonfinite_exr;
        self.clamped_codes += d.clamped_codes;
        self.hdr_above_ceiling += d.hdr_above_ceiling;
        self.ictcp_clamped += ictcp_clamped;
        self.frames_with_warnings += usize::from(!d.warnings.is_empty());
    }
}

/// Config echo written next to every run's outputs. Worker count is left
/// out so runs that differ only in parallelism produce identical files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunEcho<C> {
    pub tool: String,
    pub command: String,
    pub manifest: String,
    pub config: C,
    pub frames: usize,
    pub failed: usize,
    pub failures: Vec<FrameFailure>,
    pub diagnostics: DiagnosticTotals,
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| ConfigError(format!("output directory {}: {e}", out.display())).into())
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(ConfigError(msg.to_string()).into())
    }
}

fn failure(k: &FrameKey, e: &anyhow::Error) -> FrameFailure {
    warn!("shot {} frame {}: {e:#}", k.shot, k.frame);
    FrameFailure { shot: k.shot.clone(), frame: k.frame, error: format!("{e:#}") }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    pub manifest: PathBuf,
    pub out: PathBuf,
    #[serde(skip)]
    pub workers: usize,
    /// Clustering seed; the manifest's sampling seed when absent.
    pub seed: Option<u64>,
    pub bins: usize,
    pub chroma_floor: f64,
    pub energy: EnergyMeasure,
}

impl AnalyzeOptions {
    pub fn new(manifest: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        let cfg = AnalysisConfig::default();
        Self {
            manifest: manifest.into(),
            out: out.into(),
            workers: exec::default_workers(),
            seed: None,
            bins: cfg.bins,
            chroma_floor: cfg.chroma_floor,
            energy: EnergyMeasure::Absolute,
        }
    }

    fn config(&self) -> Result<AnalysisConfig> {
        check(self.bins >= 1, "--bins must be at least 1")?;
        check(self.chroma_floor >= 0.0 && self.chroma_floor.is_finite(), "--chroma-floor must be non-negative")?;
        Ok(AnalysisConfig { bins: self.bins, chroma_floor: self.chroma_floor, ..AnalysisConfig::default() })
    }
}

#[derive(Serialize)]
struct AnalyzeEcho {
    seed: u64,
    bins: usize,
    chroma_floor: f64,
    energy: EnergyMeasure,
    pooled_bins: usize,
    density_bins: usize,
}

/// Labels each record with its residual type by clustering the run's
/// per-frame features.
fn assign_types(records: &mut [AnalysisRecord], seed: u64) {
    let features: Vec<ResidualFeatures> = records.iter().map(|r| r.features).collect();
    match cluster_residuals(&features, seed) {
        Ok(model) => {
            for (i, r) in records.iter_mut().enumerate() {
                r.cluster = Some(model.assignment[i]);
                r.residual_type = Some(model.residual_type(i));
            }
        }
        Err(e) => warn!("residual clustering skipped: {e}"),
    }
}

fn baseline_knots(pooled: &PooledPartials) -> Vec<BaselineKnot> {
    let acc = &pooled.baseline;
    let occupied: Vec<usize> = (0..acc.bins()).filter(|&k| acc.count[k] > 0).collect();
    let (Some(&a), Some(&b)) = (occupied.first(), occupied.last()) else {
        return Vec::new();
    };
    let domain = (
        10f64.powf(acc.sum_log_sdr[a] / acc.count[a] as f64),
        10f64.powf(acc.sum_log_sdr[b] / acc.count[b] as f64),
    );
    match acc.fit(domain) {
        Ok(fit) => occupied
            .iter()
            .map(|&k| BaselineKnot { log_sdr: fit.centers[k], hdr: fit.fitted_values[k], weight: fit.weights[k] })
            .collect(),
        Err(_) => Vec::new(),
    }
}

pub fn cmd_analyze(o: &AnalyzeOptions) -> Result<Outcome> {
    let cfg = o.config()?;
    let m = load_manifest(&o.manifest)?;
    let seed = o.seed.unwrap_or(m.manifest.sampling.seed);
    prepare_out(&o.out)?;
    let keys = m.manifest.all_frames();
    info!("analyzing {} frames with {} workers", keys.len(), o.workers);

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut pooled = PooledPartials::new(&cfg);
    let mut totals = DiagnosticTotals::default();
    exec::ordered(
        &exec::pool(o.workers)?,
        &keys,
        |k| analyze_one(&m, k, &cfg),
        |k, r| match r {
            Ok((rec, p)) => {
                pooled.merge(&p);
                totals.add(&rec.diagnostics, rec.ictcp_clamped);
                records.push(rec);
            }
            Err(e) => failures.push(failure(k, &e)),
        },
    );
    assign_types(&mut records, seed);

    let out = &o.out;
    report::write_luminance_tables(out, &records)?;
    report::write_residual_table(out, &records, o.energy)?;
    let pooled_file = PooledFile {
        seed,
        pixels: pooled.density.total(),
        baseline: baseline_knots(&pooled),
        density: pooled.density,
        color: pooled.color,
        saturation: pooled.saturation,
    };
    report::write_color_tables(out, &pooled_file.color.metrics())?;
    report::write_histograms(out, &pooled_file.color, &pooled_file.saturation)?;
    report::write_json(&out.join(report::ANALYSIS_POOLED), &pooled_file)?;

    let outcome = Outcome { frames: keys.len(), failed: failures.len(), verified: None };
    let echo = RunEcho {
        tool: TOOL.into(),
        command: "analyze".into(),
        manifest: o.manifest.display().to_string(),
        config: AnalyzeEcho {
            seed,
            bins: cfg.bins,
            chroma_floor: cfg.chroma_floor,
            energy: o.energy,
            pooled_bins: cfg.pooled_bins,
            density_bins: cfg.density_bins,
        },
        frames: outcome.frames,
        failed: outcome.failed,
        failures: failures.clone(),
        diagnostics: totals,
    };
    report::write_json(&out.join(report::ANALYSIS_FRAMES), &RecordFile { seed, records, failures })?;
    report::write_json(&out.join("analyze_run.json"), &echo)?;
    Ok(outcome)
}

fn analyze_one(m: &LoadedManifest, k: &FrameKey, cfg: &AnalysisConfig) -> Result<(AnalysisRecord, PooledPartials)> {
    let shot = m.shot(&k.shot)?;
    let t = load_triplet(m, &k.shot, k.frame)?;
    let a = analyze_frame(&t, cfg)?;
    let rec = AnalysisRecord {
        shot: k.shot.clone(),
        scene: shot.scene,
        frame: k.frame,
        pixels: a.pixels,
        active: t.active,
        r_squared: a.fit.r_squared,
        gradient_rho: a.gradient.map(|g| g.rho),
        features: a.features,
        energy: a.energy,
        residual_type: None,
        cluster: None,
        color: a.color,
        ictcp_clamped: a.ictcp_clamped,
        diagnostics: t.diagnostics,
    };
    Ok((rec, a.pooled))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecideOptions {
    pub manifest: PathBuf,
    pub out: PathBuf,
    #[serde(skip)]
    pub workers: usize,
    /// Sampling seed; the manifest's when absent.
    pub seed: Option<u64>,
    pub threshold: f64,
    /// Sign-only rule; overrides `threshold`.
    pub binary: bool,
    /// Anchor band as fractions of the SDR peak.
    pub anchor_band: (f64, f64),
}

impl DecideOptions {
    pub fn new(manifest: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        let cfg = DecisionConfig::default();
        Self {
            manifest: manifest.into(),
            out: out.into(),
            workers: exec::default_workers(),
            seed: None,
            threshold: cfg.threshold,
            binary: false,
            anchor_band: cfg.anchor_band,
        }
    }

    fn config(&self) -> Result<DecisionConfig> {
        check(self.threshold >= 0.0 && self.threshold.is_finite(), "--threshold must be non-negative")?;
        let (lo, hi) = self.anchor_band;
        check(lo > 0.0 && hi > lo && hi.is_finite(), "--anchor-band needs 0 < low < high")?;
        Ok(DecisionConfig {
            threshold: if self.binary { 0.0 } else { self.threshold },
            anchor_band: self.anchor_band,
            ..DecisionConfig::default()
        })
    }
}

#[derive(Serialize)]
struct DecideEcho {
    seed: u64,
    threshold: f64,
    binary: bool,
    anchor_band: (f64, f64),
    min_anchor_pixels: usize,
    sampled: Vec<FrameKey>,
}

pub fn decision_map_name(shot: &str, frame: u32) -> String {
    format!("{shot}_{frame}_decision.png")
}

pub fn cmd_decide(o: &DecideOptions) -> Result<Outcome> {
    let cfg = o.config()?;
    let m = load_manifest(&o.manifest)?;
    if let Some(s) = m.manifest.shots.iter().find(|s| s.exr.is_none()) {
        return Err(ConfigError(format!("decide needs EXR sources; shot {} has no exr path", s.id)).into());
    }
    let seed = o.seed.unwrap_or(m.manifest.sampling.seed);
    let keys = sample_frames(&m.manifest, Quota::from_sampling(&m.manifest.sampling), seed)
        .map_err(|e| ConfigError(e.to_string()))?;
    prepare_out(&o.out)?;
    let maps = o.out.join("maps");
    fs::create_dir_all(&maps)?;
    info!("deciding {} sampled frames with {} workers", keys.len(), o.workers);

    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut totals = DiagnosticTotals::default();
    exec::ordered(
        &exec::pool(o.workers)?,
        &keys,
        |k| decide_one(&m, k, &cfg, &maps),
        |k, r| match r {
            Ok(rec) => {
                totals.add(&rec.diagnostics, 0);
                records.push(rec);
            }
            Err(e) => failures.push(failure(k, &e)),
        },
    );
    report::write_decision_tables(&o.out, &records)?;
    let outcome = Outcome { frames: keys.len(), failed: failures.len(), verified: None };
    let echo = RunEcho {
        tool: TOOL.into(),
        command: "decide".into(),
        manifest: o.manifest.display().to_string(),
        config: DecideEcho {
            seed,
            threshold: cfg.threshold,
            binary: o.binary,
            anchor_band: cfg.anchor_band,
            min_anchor_pixels: cfg.min_anchor_pixels,
            sampled: keys.clone(),
        },
        frames: outcome.frames,
        failed: outcome.failed,
        failures: failures.clone(),
        diagnostics: totals,
    };
    report::write_json(&o.out.join(report::DECISION_FRAMES), &RecordFile { seed, records, failures })?;
    report::write_json(&o.out.join("decide_run.json"), &echo)?;
    Ok(outcome)
}

fn decide_one(m: &LoadedManifest, k: &FrameKey, cfg: &DecisionConfig, maps: &Path) -> Result<DecisionRecord> {
    let shot = m.shot(&k.shot)?;
    let t = load_triplet(m, &k.shot, k.frame)?;
    let cfg = DecisionConfig { sdr_peak: shot.sdr_peak, ..*cfg };
    let d = decide_frame(&t, &cfg)?;
    let name = decision_map_name(&k.shot, k.frame);
    io::write_rgb8(&maps.join(&name), t.width(), t.height(), render_decision(&d.map))?;
    Ok(DecisionRecord {
        shot: k.shot.clone(),
        scene: shot.scene,
        frame: k.frame,
        gain: d.gain,
        threshold: cfg.threshold,
        counts: d.counts,
        recovery_ratio: d.counts.recovery_ratio(),
        adjustment_ratio: d.counts.adjustment_ratio(),
        neutral_fraction: d.counts.neutral_fraction(),
        exr_hdr: d.structure.exr_hdr,
        hdr_sdr: d.structure.hdr_sdr,
        map: format!("maps/{name}"),
        diagnostics: t.diagnostics,
    })
}

/// Hue histogram range drawn by the plot command, degrees.
pub const HUE_PLOT_MAX: f64 = 30.0;
pub const HUE_PLOT_STEP: f64 = 0.1;

pub fn cmd_plot(out: &Path, kinds: &[PlotKind]) -> Result<PlotSummary> {
    let path = out.join(report::ANALYSIS_POOLED);
    if !path.is_file() {
        return Err(ConfigError(format!(
            "{} not found; run `hdrtriad analyze --out {}` first",
            path.display(),
            out.display()
        ))
        .into());
    }
    let pooled: PooledFile = report::read_json(&path)?;
    let dir = out.join("plots");
    fs::create_dir_all(&dir)?;
    let mut names = Vec::new();
    for kind in kinds {
        let (name, canvas) = match kind {
            PlotKind::Density => ("luminance_density.png", plot::density_plot(&pooled.density, &pooled.baseline)),
            PlotKind::Hue => {
                ("hue_shift_histogram.png", plot::hue_plot(&pooled.color.hue_histogram(), HUE_PLOT_STEP, HUE_PLOT_MAX))
            }
            PlotKind::Saturation => ("chroma_change_heatmap.png", plot::saturation_plot(&pooled.saturation)),
        };
        canvas.save(&dir.join(name))?;
        names.push(name.to_string());
    }
    let axes = LogAxes { range: pooled.density.range, size: plot::DENSITY_SIZE };
    let summary = PlotSummary {
        plots: names,
        density_mass: pooled.density.total(),
        hue_mass: pooled.color.hue_histogram().iter().sum(),
        saturation_mass: pooled.saturation.total(),
        baseline_identity_offset_px: plot::identity_offset(&pooled.baseline, &axes),
    };
    report::write_json(&dir.join("plot_summary.json"), &summary)?;
    Ok(summary)
}

pub fn cmd_synth(spec: &Path, out: &Path, workers: usize, seed: Option<u64>) -> Result<Outcome> {
    let mut corpus = CorpusSpec::load(spec)?;
    if let Some(s) = seed {
        corpus.seed = s;
    }
    prepare_out(out)?;
    let frames = corpus::write_corpus(&corpus, out, workers)?;
    info!("wrote {frames} synthetic frames to {}", out.display());
    Ok(Outcome { frames, failed: 0, verified: None })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub out: PathBuf,
    /// Synthetic corpus directory to verify against its ground truth.
    pub truth: Option<PathBuf>,
    #[serde(skip)]
    pub workers: usize,
    pub seed: Option<u64>,
    pub bins: usize,
    pub chroma_floor: f64,
    pub threshold: f64,
    pub binary: bool,
    pub anchor_band: (f64, f64),
    pub energy: EnergyMeasure,
}

impl ReportOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        let (a, d) = (AnalyzeOptions::new("", ""), DecideOptions::new("", ""));
        Self {
            out: out.into(),
            truth: None,
            workers: a.workers,
            seed: None,
            bins: a.bins,
            chroma_floor: a.chroma_floor,
            threshold: d.threshold,
            binary: false,
            anchor_band: d.anchor_band,
            energy: a.energy,
        }
    }
}

/// Rebuilds every CSV from the JSON records in `out`, and with a truth
/// directory re-runs the analyses on that corpus and checks them against
/// its ground truth (written to `verify.json`).
pub fn cmd_report(o: &ReportOptions) -> Result<Outcome> {
    let analysis = o.out.join(report::ANALYSIS_FRAMES);
    let decisions = o.out.join(report::DECISION_FRAMES);
    if !analysis.is_file() && !decisions.is_file() && o.truth.is_none() {
        return Err(ConfigError(format!(
            "no records in {}; run `hdrtriad analyze` or `hdrtriad decide` first",
            o.out.display()
        ))
        .into());
    }
    prepare_out(&o.out)?;
    let mut outcome = Outcome { frames: 0, failed: 0, verified: None };
    if analysis.is_file() {
        let f: RecordFile<AnalysisRecord> = report::read_json(&analysis)?;
        report::write_luminance_tables(&o.out, &f.records)?;
        report::write_residual_table(&o.out, &f.records, o.energy)?;
        outcome.frames += f.records.len() + f.failures.len();
        outcome.failed += f.failures.len();
        let pooled = o.out.join(report::ANALYSIS_POOLED);
        if pooled.is_file() {
            let p: PooledFile = report::read_json(&pooled)?;
            report::write_color_tables(&o.out, &p.color.metrics())?;
            report::write_histograms(&o.out, &p.color, &p.saturation)?;
        }
    }
    if decisions.is_file() {
        let f: RecordFile<DecisionRecord> = report::read_json(&decisions)?;
        report::write_decision_tables(&o.out, &f.records)?;
        outcome.frames += f.records.len() + f.failures.len();
        outcome.failed += f.failures.len();
    }
    if let Some(dir) = &o.truth {
        let r = verify_corpus(dir, o)?;
        for c in r.checks.iter().filter(|c| !c.passed) {
            warn!("verification {} failed: measured {} against {} ({})", c.name, c.measured, c.limit, c.detail);
        }
        report::write_json(&o.out.join("verify.json"), &r)?;
        outcome.verified = Some(r.passed);
    }
    Ok(outcome)
}

struct Observed {
    spec_hash: String,
    area: ActiveArea,
    fit: MonotoneFit,
    features: ResidualFeatures,
    labels: Option<Plane<DecisionLabel>>,
    sdr: Plane<Ictcp>,
    hdr: Plane<Ictcp>,
}

/// Runs both analyses over a generated corpus and compares them with the
/// recorded ground truth.
pub fn verify_corpus(dir: &Path, o: &ReportOptions) -> Result<VerifyReport> {
    let corpus = CorpusSpec::load(&dir.join(corpus::CORPUS_FILE))?;
    let m = load_manifest(&dir.join(corpus::MANIFEST_FILE))?;
    let acfg = AnalyzeOptions { bins: o.bins, chroma_floor: o.chroma_floor, ..AnalyzeOptions::new("", "") }.config()?;
    let dopts = DecideOptions {
        threshold: o.threshold,
        binary: o.binary,
        anchor_band: o.anchor_band,
        ..DecideOptions::new("", "")
    };
    let dcfg = dopts.config()?;
    let frames = corpus.frames();
    let mut observed = Vec::with_capacity(frames.len());
    let mut truths = Vec::with_capacity(frames.len());
    let mut first_err = None;
    exec::ordered(
        &exec::pool(o.workers)?,
        &frames,
        |&(si, frame)| -> Result<_> {
            let shot = &corpus.shots[si];
            let truth = corpus::load_truth(dir, &shot.id, frame)?;
            let t = load_triplet(&m, &shot.id, frame)?;
            let a = analyze_frame(&t, &acfg)?;
            let labels = match decide_frame(&t, &dcfg) {
                Ok(d) => Some(d.map.labels),
                Err(e) => {
                    warn!("shot {} frame {frame}: no decision map ({e})", shot.id);
                    None
                }
            };
            let obs = Observed {
                spec_hash: corpus.frame_spec(shot, frame).spec_hash(),
                area: t.active,
                fit: a.fit,
                features: a.features,
                labels,
                sdr: a.sdr_ictcp,
                hdr: a.hdr_ictcp,
            };
            Ok((obs, truth))
        },
        |_, r| match r {
            Ok((obs, truth)) => {
                observed.push(obs);
                truths.push(truth);
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        },
    );
    if let Some(e) = first_err {
        return Err(e).context("verification needs every corpus frame");
    }
    let features: Vec<ResidualFeatures> = observed.iter().map(|x| x.features).collect();
    let seed = o.seed.unwrap_or(m.manifest.sampling.seed);
    let types = match cluster_residuals(&features, seed) {
        Ok(model) => (0..observed.len()).map(|i| Some(model.residual_type(i))).collect(),
        Err(_) => vec![None; observed.len()],
    };
    let obs: Vec<FrameObservation> = observed
        .iter()
        .zip(types)
        .map(|(x, residual_type)| FrameObservation {
            spec_hash: x.spec_hash.clone(),
            area: x.area,
            fit: Some(&x.fit),
            residual_type,
            labels: x.labels.as_ref(),
            sdr_ictcp: Some(&x.sdr),
            hdr_ictcp: Some(&x.hdr),
        })
        .collect();
    let tol = Tolerances { chroma_floor: o.chroma_floor, ..Tolerances::default() };
    Ok(verify(&obs, &truths, &tol)?)
}
