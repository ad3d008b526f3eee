//! Image containers: EXR scene-referred frames, 16-bit PNG/TIFF master
//! codes, headerless planar float dumps, and PNG output.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use hdrtriad_core::ingest::{CodeRange, RawDims};
use hdrtriad_core::Plane;
use image::{ImageBuffer, ImageFormat, Rgb};

fn open(path: &Path) -> Result<image::DynamicImage> {
    image::open(path).with_context(|| format!("reading {}", path.display()))
}

/// Linear RGB samples of an EXR (half or float).
pub fn read_exr(path: &Path) -> Result<Plane<[f64; 3]>> {
    let img = open(path)?.to_rgb32f();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img.pixels().map(|p| p.0.map(f64::from)).collect();
    Ok(Plane::from_vec(w, h, data)?)
}

/// Normalised master codes from a 16-bit PNG or TIFF, or from a planar
/// float dump when `raw` is set.
pub fn read_codes(path: &Path, range: CodeRange, raw: Option<RawDims>) -> Result<Plane<[f64; 3]>> {
    if let Some(dims) = raw {
        return read_raw_planar(path, dims);
    }
    let img = open(path)?.to_rgb16();
    let scale = match range {
        CodeRange::Full => 65535.0,
        CodeRange::TwelveInSixteen => 4095.0,
    };
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img.pixels().map(|p| p.0.map(|c| f64::from(c) / scale)).collect();
    Ok(Plane::from_vec(w, h, data)?)
}

/// Headerless little-endian f32 dump: the full R plane, then G, then B.
pub fn read_raw_planar(path: &Path, dims: RawDims) -> Result<Plane<[f64; 3]>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let n = dims.width * dims.height;
    if bytes.len() != n * 12 {
        bail!("{}: expected {} bytes for {}x{} planar RGB f32, found {}", path.display(), n * 12, dims.width, dims.height, bytes.len());
    }
    let f = |k: usize| f64::from(f32::from_le_bytes(bytes[k * 4..k * 4 + 4].try_into().unwrap()));
    let data = (0..n).map(|i| [f(i), f(n + i), f(2 * n + i)]).collect();
    Ok(Plane::from_vec(dims.width, dims.height, data)?)
}

pub fn write_raw_planar(path: &Path, plane: &Plane<[f64; 3]>) -> Result<()> {
    let mut out = Vec::with_capacity(plane.len() * 12);
    for c in 0..3 {
        for p in plane.data() {
            out.extend_from_slice(&(p[c] as f32).to_le_bytes());
        }
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn write_exr(path: &Path, plane: &Plane<[f64; 3]>) -> Result<()> {
    let data: Vec<f32> = plane.data().iter().flat_map(|p| p.map(|v| v as f32)).collect();
    let img: ImageBuffer<Rgb<f32>, Vec<f32>> =
        ImageBuffer::from_raw(plane.width() as u32, plane.height() as u32, data).context("EXR buffer size")?;
    img.save_with_format(path, ImageFormat::OpenExr).with_context(|| format!("writing {}", path.display()))
}

/// Codes in [0, 1] written as 16-bit RGB PNG.
pub fn write_png16(path: &Path, codes: &Plane<[f64; 3]>) -> Result<()> {
    let data: Vec<u16> =
        codes.data().iter().flat_map(|p| p.map(|c| (c.clamp(0.0, 1.0) * 65535.0).round() as u16)).collect();
    let img: ImageBuffer<Rgb<u16>, Vec<u16>> =
        ImageBuffer::from_raw(codes.width() as u32, codes.height() as u32, data).context("PNG buffer size")?;
    img.save_with_format(path, ImageFormat::Png).with_context(|| format!("writing {}", path.display()))
}

/// Packed RGB8 written as PNG.
pub fn write_rgb8(path: &Path, width: usize, height: usize, rgb: Vec<u8>) -> Result<()> {
    let img: ImageBuffer<Rgb<u8>, Vec<u8>> =
        ImageBuffer::from_raw(width as u32, height as u32, rgb).context("RGB8 buffer size")?;
    img.save_with_format(path, ImageFormat::Png).with_context(|| format!("writing {}", path.display()))
}

pub fn read_rgb8(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let img = open(path)?.to_rgb8();
    Ok((img.width() as usize, img.height() as usize, img.into_raw()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png16_codes_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.png");
        let codes = Plane::from_fn(7, 3, |x, y| [x as f64 / 65535.0, (x * y) as f64 * 1000.0 / 65535.0, 1.0]);
        write_png16(&p, &codes).unwrap();
        assert_eq!(read_codes(&p, CodeRange::Full, None).unwrap(), codes);
    }

    #[test]
    fn twelve_bit_codes_scale_by_4095() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.png");
        let codes = Plane::filled(2, 2, [4095.0 / 65535.0; 3]);
        write_png16(&p, &codes).unwrap();
        let back = read_codes(&p, CodeRange::TwelveInSixteen, None).unwrap();
        assert_eq!(back.data()[0], [1.0; 3]);
    }

    #[test]
    fn exr_round_trips_f32_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.exr");
        let plane = Plane::from_fn(5, 4, |x, y| [x as f64 * 0.25, y as f64 * 100.5, 1e-4]).map(|v| v.map(|c| c as f32 as f64));
        write_exr(&p, &plane).unwrap();
        assert_eq!(read_exr(&p).unwrap(), plane);
    }

    #[test]
    fn raw_planar_round_trip_and_size_check() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.raw");
        let plane = Plane::from_fn(3, 2, |x, y| [x as f64, y as f64, 0.5]);
        write_raw_planar(&p, &plane).unwrap();
        assert_eq!(read_raw_planar(&p, RawDims { width: 3, height: 2 }).unwrap(), plane);
        assert!(read_raw_planar(&p, RawDims { width: 4, height: 2 }).is_err());
    }
}
