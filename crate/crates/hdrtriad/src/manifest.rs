//! TOML shot manifests and triplet loading. Relative paths in a manifest
//! resolve against the manifest's own directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hdrtriad_core::ingest::{build_master_triplet, build_triplet, render_template, FrameTriplet, ShotManifest, ShotSpec};

use crate::{io, ConfigError};

#[derive(Clone, Debug)]
pub struct LoadedManifest {
    pub manifest: ShotManifest,
    pub base: PathBuf,
}

impl LoadedManifest {
    pub fn resolve(&self, template: &str, frame: u32) -> PathBuf {
        self.base.join(render_template(template, frame))
    }

    pub fn shot(&self, id: &str) -> Result<&ShotSpec> {
        self.manifest.shot(id).ok_or_else(|| ConfigError(format!("unknown shot {id}")).into())
    }
}

pub fn parse_manifest(text: &str) -> Result<ShotManifest> {
    let m: ShotManifest = toml::from_str(text).map_err(|e| ConfigError(format!("manifest: {e}")))?;
    m.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(m)
}

/// Reads, parses and validates a manifest, checking that every path
/// template resolves for the first frame of its shot.
pub fn load_manifest(path: &Path) -> Result<LoadedManifest> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError(format!("reading manifest {}: {e}", path.display())))?;
    let manifest = parse_manifest(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let loaded = LoadedManifest { manifest, base };
    for shot in &loaded.manifest.shots {
        let first = shot.frame_indices()[0];
        for t in shot.exr.iter().chain([&shot.sdr, &shot.hdr]) {
            let p = loaded.resolve(t, first);
            if !p.is_file() {
                return Err(ConfigError(format!("shot {}: {} does not exist", shot.id, p.display())).into());
            }
        }
    }
    Ok(loaded)
}

/// Reads and decodes one frame of one shot.
pub fn load_triplet(m: &LoadedManifest, shot_id: &str, frame: u32) -> Result<FrameTriplet> {
    let shot = m.shot(shot_id)?;
    if !shot.contains_frame(frame) {
        return Err(ConfigError(format!("shot {shot_id} has no frame {frame}")).into());
    }
    let sdr = io::read_codes(&m.resolve(&shot.sdr, frame), shot.code_range, shot.raw)?;
    let hdr = io::read_codes(&m.resolve(&shot.hdr, frame), shot.code_range, shot.raw)?;
    let (sdr_spec, hdr_spec) = (shot.sdr_master()?, shot.hdr_master()?);
    let t = match &shot.exr {
        Some(t) => {
            let path = m.resolve(t, frame);
            let exr = match shot.raw {
                Some(dims) if path.extension().is_some_and(|e| e == "raw") => io::read_raw_planar(&path, dims)?,
                _ => io::read_exr(&path)?,
            };
            build_triplet(frame, exr, &sdr, &hdr, &sdr_spec, &hdr_spec)
        }
        None => build_master_triplet(frame, &sdr, &hdr, &sdr_spec, &hdr_spec),
    };
    t.with_context(|| format!("shot {shot_id} frame {frame}"))
}
