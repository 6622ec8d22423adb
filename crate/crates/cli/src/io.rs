//! File formats: binary PGM (8/16-bit), raw `f64` grids, CSV signals.
//!
//! Raw grid layout, little-endian: 8-byte magic `POTTSF64`, `u32` width,
//! `u32` height, then `width·height` `f64` values row-major. Sinograms use
//! width = detectors and height = angles.

use std::fs;
use std::path::Path;

use image::{DynamicImage, ImageFormat};
use potts_core::{DataVector64, Image64, Partition};

use crate::error::{CliError, CliResult};

pub const RAW_MAGIC: &[u8; 8] = b"POTTSF64";
pub const RAW_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

pub fn encode_raw(width: usize, height: usize, values: &[f64]) -> CliResult<Vec<u8>> {
    let w = u32::try_from(width).map_err(|_| CliError::Format("grid too wide".into()))?;
    let h = u32::try_from(height).map_err(|_| CliError::Format("grid too tall".into()))?;
    let mut out = Vec::with_capacity(RAW_HEADER_LEN + 8 * values.len());
    out.extend_from_slice(RAW_MAGIC);
    out.extend_from_slice(&w.to_le_bytes());
    out.extend_from_slice(&h.to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// `(width, height, values)` of a raw grid.
pub fn decode_raw(bytes: &[u8]) -> CliResult<(usize, usize, Vec<f64>)> {
    if bytes.len() < RAW_HEADER_LEN || &bytes[..8] != RAW_MAGIC {
        return Err(CliError::Format("missing raw grid header".into()));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().expect("4 bytes")) as usize;
    let (w, h) = (word(8), word(12));
    let body = &bytes[RAW_HEADER_LEN..];
    if w.checked_mul(h).and_then(|n| n.checked_mul(8)) != Some(body.len()) {
        return Err(CliError::Format(format!(
            "raw grid {w}x{h} needs {} payload bytes, found {}",
            w * h * 8,
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((w, h, values))
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_raw_image(path: &Path, img: &Image64) -> CliResult<()> {
    write_bytes(path, &encode_raw(img.width(), img.height(), img.values())?)
}

pub fn write_raw_sinogram(path: &Path, data: &DataVector64) -> CliResult<()> {
    write_bytes(path, &encode_raw(data.cols(), data.rows(), data.values())?)
}

pub fn read_raw_sinogram(path: &Path) -> CliResult<DataVector64> {
    let (w, h, values) = decode_raw(&read_bytes(path)?)?;
    Ok(DataVector64::new(h, w, values)?)
}

/// Reads a raw grid or a PGM; PGM samples are scaled to `[0, 1]`.
pub fn read_image(path: &Path) -> CliResult<Image64> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(RAW_MAGIC) {
        let (w, h, values) = decode_raw(&bytes)?;
        return Ok(Image64::new(w, h, values)?);
    }
    let decoded = image::load_from_memory_with_format(&bytes, ImageFormat::Pnm)
        .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let values = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        other => other
            .to_luma16()
            .into_raw()
            .into_iter()
            .map(|v| v as f64 / 65535.0)
            .collect(),
    };
    Ok(Image64::new(w, h, values)?)
}

/// Binary P5 body: one byte per sample, or two big-endian bytes when
/// `maxval > 255`.
fn encode_pgm(width: usize, height: usize, maxval: u16, samples: &[u16]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    if maxval > 255 {
        for s in samples {
            out.extend_from_slice(&s.to_be_bytes());
        }
    } else {
        out.extend(samples.iter().map(|&s| s as u8));
    }
    out
}

/// Values clamped to `[0, 1]`, scaled to the sample range and rounded.
pub fn write_pgm(path: &Path, img: &Image64, depth: BitDepth) -> CliResult<()> {
    let maxval: u16 = match depth {
        BitDepth::Eight => 255,
        BitDepth::Sixteen => 65535,
    };
    let scale = maxval as f64;
    let samples: Vec<u16> = img.values().iter().map(|v| (v.clamp(0.0, 1.0) * scale).round() as u16).collect();
    write_bytes(path, &encode_pgm(img.width(), img.height(), maxval, &samples))
}

/// Segment labels as raw 16-bit samples.
pub fn write_labels(path: &Path, partition: &Partition) -> CliResult<()> {
    if partition.count() > u16::MAX as usize + 1 {
        return Err(CliError::Format(format!(
            "{} segments do not fit a 16-bit label image",
            partition.count()
        )));
    }
    let (w, h) = partition.dims();
    let samples: Vec<u16> = partition.labels().iter().map(|&l| l as u16).collect();
    write_bytes(path, &encode_pgm(w, h, 65535, &samples))
}

/// Comma- or whitespace-separated reals.
pub fn parse_signal(text: &str) -> CliResult<Vec<f64>> {
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Format(format!("not a finite number: {t:?}")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(CliError::Format("empty signal".into()));
    }
    Ok(values)
}

pub fn read_signal(path: &Path) -> CliResult<Vec<f64>> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|_| CliError::Format(format!("{}: not UTF-8", path.display())))?;
    parse_signal(&text)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    write_bytes(path, text.as_bytes())
}
