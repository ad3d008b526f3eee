//! Synthetic corpora: a TOML description of shots whose frames come from
//! the generator, written out as EXR + 16-bit PNG triplets with a manifest
//! and per-frame ground truth.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hdrtriad_core::ingest::{CodeRange, Sampling, SceneCategory, ShotManifest, ShotSpec, Transfer};
use hdrtriad_core::codec::WhitePoint;
use hdrtriad_core::synth::{generate, GroundTruth, SynthSpec};
use serde::{Deserialize, Serialize};

use crate::report::write_json;
use crate::{exec, io, ConfigError};

pub const CORPUS_FILE: &str = "corpus.toml";
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusShot {
    pub id: String,
    pub scene: SceneCategory,
    /// Number of frames.
    pub frames: u32,
    /// First frame index.
    #[serde(default)]
    pub start: u32,
    pub synth: SynthSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    /// Mixed into every shot's generator seed.
    #[serde(default)]
    pub seed: u64,
    /// Sampling plan copied into the manifest; every frame when absent.
    #[serde(default)]
    pub sampling: Option<Sampling>,
    pub shots: Vec<CorpusShot>,
}

impl CorpusSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| ConfigError(format!("corpus spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("reading {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots.is_empty() {
            return Err(ConfigError("corpus spec lists no shots".into()).into());
        }
        for (i, s) in self.shots.iter().enumerate() {
            if s.frames == 0 {
                return Err(ConfigError(format!("shot {} has no frames", s.id)).into());
            }
            if s.id.is_empty() || s.id.contains(['/', '\\']) {
                return Err(ConfigError(format!("shot id {:?} is not a plain name", s.id)).into());
            }
            if self.shots[..i].iter().any(|o| o.id == s.id) {
                return Err(ConfigError(format!("duplicate shot id {}", s.id)).into());
            }
            s.synth.validate().map_err(|e| ConfigError(format!("shot {}: {e}", s.id)))?;
        }
        Ok(())
    }

    /// The generator spec of one frame.
    pub fn frame_spec(&self, shot: &CorpusShot, frame: u32) -> SynthSpec {
        let mut s = shot.synth.clone();
        s.seed ^= self.seed;
        s.for_frame(frame)
    }

    pub fn frames(&self) -> Vec<(usize, u32)> {
        self.shots
            .iter()
            .enumerate()
            .flat_map(|(i, s)| (s.start..s.start + s.frames).map(move |f| (i, f)))
            .collect()
    }

    pub fn manifest(&self) -> ShotManifest {
        let longest = self.shots.iter().map(|s| s.frames as usize).max().unwrap_or(1);
        ShotManifest {
            sampling: self.sampling.clone().unwrap_or(Sampling {
                seed: self.seed,
                frames_per_shot: longest,
                per_category: None,
            }),
            shots: self
                .shots
                .iter()
                .map(|s| ShotSpec {
                    id: s.id.clone(),
                    scene: s.scene,
                    frames: vec![[s.start, s.start + s.frames - 1]],
                    exr: Some(format!("exr/{}_{{frame:04}}.exr", s.id)),
                    sdr: format!("sdr/{}_{{frame:04}}.png", s.id),
                    hdr: format!("hdr/{}_{{frame:04}}.png", s.id),
                    sdr_transfer: Transfer::Gamma26,
                    hdr_transfer: Transfer::Pq,
                    sdr_peak: hdrtriad_core::codec::transfer::SDR_CINEMA_PEAK,
                    hdr_peak: hdrtriad_core::codec::transfer::HDR_CINEMA_PEAK,
                    white: [WhitePoint::D65.x, WhitePoint::D65.y],
                    code_range: CodeRange::Full,
                    raw: None,
                })
                .collect(),
        }
    }
}

pub fn truth_path(dir: &Path, shot: &str, frame: u32) -> PathBuf {
    dir.join("truth").join(format!("{shot}_{frame:04}.json"))
}

pub fn load_truth(dir: &Path, shot: &str, frame: u32) -> Result<GroundTruth> {
    crate::report::read_json(&truth_path(dir, shot, frame))
}

/// Generates every frame of the corpus under `out`.
pub fn write_corpus(spec: &CorpusSpec, out: &Path, workers: usize) -> Result<usize> {
    spec.validate()?;
    for sub in ["exr", "sdr", "hdr", "truth"] {
        fs::create_dir_all(out.join(sub)).with_context(|| format!("creating {}", out.display()))?;
    }
    let frames = spec.frames();
    let pool = exec::pool(workers)?;
    let mut first_err = None;
    exec::ordered(
        &pool,
        &frames,
        |&(si, frame)| -> Result<()> {
            let shot = &spec.shots[si];
            let f = generate(&spec.frame_spec(shot, frame))?;
            let name = format!("{}_{frame:04}", shot.id);
            io::write_exr(&out.join("exr").join(format!("{name}.exr")), &f.exr)?;
            io::write_png16(&out.join("sdr").join(format!("{name}.png")), &f.sdr_codes)?;
            io::write_png16(&out.join("hdr").join(format!("{name}.png")), &f.hdr_codes)?;
            write_json(&truth_path(out, &shot.id, frame), &f.truth)
        },
        |_, r| {
            if let Err(e) = r {
                first_err.get_or_insert(e);
            }
        },
    );
    if let Some(e) = first_err {
        return Err(e);
    }
    let manifest = toml::to_string_pretty(&spec.manifest()).context("serialising manifest")?;
    fs::write(out.join(MANIFEST_FILE), manifest)?;
    fs::write(out.join(CORPUS_FILE), toml::to_string_pretty(spec).context("serialising corpus spec")?)?;
    Ok(frames.len())
}
