use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hdrtriad::commands::{self, AnalyzeOptions, DecideOptions, ReportOptions};
use hdrtriad::plot::PlotKind;
use hdrtriad::{exec, exit_code_for};
use hdrtriad_core::lumamap::EnergyMeasure;

#[derive(Parser)]
#[command(name = "hdrtriad", version, about = "EXR-anchored analysis of co-mastered SDR and HDR frames")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (outputs do not depend on it).
    #[arg(long, default_value_t = exec::default_workers())]
    workers: usize,
    /// Overrides the manifest's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AnalysisFlags {
    /// Log-luminance bins of the isotonic fit.
    #[arg(long, default_value_t = 4096)]
    bins: usize,
    /// Chroma below which hue is treated as undefined.
    #[arg(long, default_value_t = hdrtriad_core::chromastats::DEFAULT_CHROMA_FLOOR)]
    chroma_floor: f64,
    /// Residual mass used for the energy ratio.
    #[arg(long, value_enum, default_value = "absolute")]
    energy: Energy,
}

#[derive(Args)]
struct DecisionFlags {
    /// Neutral band half-width in ΔE_ITP units.
    #[arg(long, default_value_t = hdrtriad_core::decision::DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Sign-only labelling (no neutral band).
    #[arg(long)]
    binary: bool,
    /// Anchor band as fractions of the SDR peak, e.g. 0.1,0.2.
    #[arg(long, value_parser = parse_band, default_value = "0.1,0.2")]
    anchor_band: (f64, f64),
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Energy {
    Absolute,
    Squared,
}

impl From<Energy> for EnergyMeasure {
    fn from(e: Energy) -> Self {
        match e {
            Energy::Absolute => EnergyMeasure::Absolute,
            Energy::Squared => EnergyMeasure::Squared,
        }
    }
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected LOW,HIGH")?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| e.to_string());
    Ok((p(a)?, p(b)?))
}

#[derive(Subcommand)]
enum Command {
    /// Luminance baseline, residual taxonomy and colour statistics for every listed frame.
    Analyze {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flags: AnalysisFlags,
    },
    /// EXR-anchored decision maps for the sampled frames.
    Decide {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        flags: DecisionFlags,
    },
    /// Plots from a previous `analyze` run in --out.
    Plot {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "density,hue,saturation")]
        plots: Vec<PlotKind>,
    },
    /// Generates a synthetic corpus with ground truth.
    Synth {
        /// Corpus description (TOML).
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rebuilds CSV tables from the records in --out; with --truth also verifies a synthetic corpus.
    Report {
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        analysis: AnalysisFlags,
        #[command(flatten)]
        decision: DecisionFlags,
    },
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let outcome = match cli.command {
        Command::Analyze { manifest, common, flags } => commands::cmd_analyze(&AnalyzeOptions {
            manifest,
            out: common.out,
            workers: common.workers,
            seed: common.seed,
            bins: flags.bins,
            chroma_floor: flags.chroma_floor,
            energy: flags.energy.into(),
        })?,
        Command::Decide { manifest, common, flags } => commands::cmd_decide(&DecideOptions {
            manifest,
            out: common.out,
            workers: common.workers,
            seed: common.seed,
            threshold: flags.threshold,
            binary: flags.binary,
            anchor_band: flags.anchor_band,
        })?,
        Command::Plot { out, plots } => {
            commands::cmd_plot(&out, &plots)?;
            return Ok(hdrtriad::EXIT_OK);
        }
        Command::Synth { spec, common } => commands::cmd_synth(&spec, &common.out, common.workers, common.seed)?,
        Command::Report { truth, common, analysis, decision } => commands::cmd_report(&ReportOptions {
            out: common.out,
            truth,
            workers: common.workers,
            seed: common.seed,
            bins: analysis.bins,
            chroma_floor: analysis.chroma_floor,
            threshold: decision.threshold,
            binary: decision.binary,
            anchor_band: decision.anchor_band,
            energy: analysis.energy.into(),
        })?,
    };
    if outcome.failed > 0 {
        log::warn!("{} of {} frames failed", outcome.failed, outcome.frames);
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { hdrtriad::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let code = run(cli).unwrap_or_else(|e| {
        log::error!("{e:#}");
        exit_code_for(&e)
    });
    ExitCode::from(code as u8)
}
