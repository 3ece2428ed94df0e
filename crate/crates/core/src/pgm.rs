//! Binary PGM (P5, 8-bit) reading and writing, plus quantization of real
//! valued fields to bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{ImageGrid, ScalarField};

/// 8-bit grey image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn to_field(&self, h: f64) -> Result<ScalarField> {
        let grid = ImageGrid::new(self.width, self.height, h)?;
        ScalarField::new(grid, self.pixels.iter().map(|&p| p as f64).collect())
    }
}

fn header_token<'a>(data: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Format("truncated PGM header".into()));
    }
    Ok(&data[start..*pos])
}

fn header_number(data: &[u8], pos: &mut usize) -> Result<usize> {
    let tok = header_token(data, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("bad number in PGM header".into()))
}

pub fn decode_pgm(data: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    if header_token(data, &mut pos)? != b"P5" {
        return Err(Error::Format("not a binary PGM (P5)".into()));
    }
    let width = header_number(data, &mut pos)?;
    let height = header_number(data, &mut pos)?;
    let maxval = header_number(data, &mut pos)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("unsupported maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let n = width * height;
    let raster = data
        .get(pos..pos + n)
        .ok_or_else(|| Error::Format("truncated PGM raster".into()))?;
    Ok(GrayImage {
        width,
        height,
        pixels: raster.to_vec(),
    })
}

pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.pixels);
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(path: impl AsRef<Path>, image: &GrayImage) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_pgm(image))?;
    Ok(())
}

/// Affine map `pixel = offset + scale · value` applied before rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantization {
    pub offset: f64,
    pub scale: f64,
}

impl Quantization {
    pub const IDENTITY: Quantization = Quantization {
        offset: 0.0,
        scale: 1.0,
    };

    /// Stretches `[min, max]` of `field` onto `[0, 255]`.
    pub fn min_max(field: &ScalarField) -> Self {
        let (lo, hi) = (field.min(), field.max());
        if hi > lo {
            let scale = 255.0 / (hi - lo);
            Self {
                offset: -lo * scale,
                scale,
            }
        } else {
            Self::IDENTITY
        }
    }

    /// Maps `[−max|v|, max|v|]` onto `[0, 255]` with zero at 127.5.
    pub fn symmetric(field: &ScalarField) -> Self {
        let peak = field.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let scale = if peak > 0.0 { 127.5 / peak } else { 0.0 };
        Self { offset: 127.5, scale }
    }

    pub fn sidecar(&self) -> String {
        format!("offset={}\nscale={}\n", self.offset, self.scale)
    }
}

/// Rounds half to even and clamps into `0..=255`.
pub fn quantize(field: &ScalarField, q: Quantization) -> GrayImage {
    let pixels = field
        .values()
        .iter()
        .map(|&x| (q.offset + q.scale * x).round_ties_even().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage {
        width: field.grid().width(),
        height: field.grid().height(),
        pixels,
    }
}
