//! Grayscale images and binary PGM (P5) input/output.
//!
//! Pixels are kept as `f64` samples so transforms and fusion rules never
//! round in the middle of the pipeline. Rounding and clamping to `[0, 255]`
//! happen only when an image is written out.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A rectangular grid of intensities stored row-major, top-left first.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!("empty image {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::Shape(format!(
                "{} samples for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// The `width` x `height` top-left region of this image.
    pub fn crop(&self, width: usize, height: usize) -> Result<Self> {
        if width > self.width || height > self.height {
            return Err(Error::Shape(format!(
                "cannot crop {}x{} to {width}x{height}",
                self.width, self.height
            )));
        }
        Self::from_fn(width, height, |r, c| self.get(r, c))
    }

    /// Samples rounded to the nearest integer and clamped to `[0, 255]`.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.pixels.iter().map(|&v| quantize_sample(v)).collect()
    }
}

fn quantize_sample(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.round().clamp(0.0, 255.0) as u8
}

/// Parses a binary PGM held in memory.
pub fn decode_pgm(data: &[u8]) -> Result<GrayImage> {
    if data.len() < 2 {
        return Err(Error::Parse("file too short for a PNM magic".into()));
    }
    match &data[..2] {
        b"P5" => {}
        b"P2" => return Err(Error::UnsupportedFormat("ASCII PGM (P2)".into())),
        m if m[0] == b'P' && m[1].is_ascii_digit() => {
            return Err(Error::UnsupportedFormat(format!(
                "PNM variant {}",
                String::from_utf8_lossy(m)
            )))
        }
        _ => return Err(Error::Parse("missing P5 magic".into())),
    }

    let mut pos = 2;
    let width = header_number(data, &mut pos)?;
    let height = header_number(data, &mut pos)?;
    let maxval = header_number(data, &mut pos)?;
    if width == 0 || height == 0 {
        return Err(Error::Parse(format!("zero dimension {width}x{height}")));
    }
    if maxval == 0 {
        return Err(Error::Parse("maxval of 0".into()));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedFormat(format!(
            "maxval {maxval} needs 16-bit samples"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    match data.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::Parse("no whitespace after maxval".into())),
    }

    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Parse("dimensions overflow".into()))?;
    let raster = &data[pos..];
    if raster.len() < count {
        return Err(Error::Parse(format!(
            "payload holds {} of {count} bytes",
            raster.len()
        )));
    }
    let pixels = raster[..count].iter().map(|&b| f64::from(b)).collect();
    GrayImage::new(width, height, pixels)
}

fn header_number(data: &[u8], pos: &mut usize) -> Result<usize> {
    // skip whitespace and `#` comments
    loop {
        match data.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = data.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(Error::Parse("header ends early".into())),
        }
    }
    let start = *pos;
    while data.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Parse(format!("expected a number at byte {start}")));
    }
    std::str::from_utf8(&data[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse("header number out of range".into()))
}

/// Serializes with the canonical header `P5\n<w> <h>\n255\n`.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.to_bytes());
    out
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode_pgm(&fs::read(path)?)
}

/// Writes `img` as P5. Samples are rounded and clamped here, never earlier.
pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}

/// Crops both images to their common top-left `min(w) x min(h)` region.
pub fn crop_to_common(a: &GrayImage, b: &GrayImage) -> Result<(GrayImage, GrayImage)> {
    let width = a.width.min(b.width);
    let height = a.height.min(b.height);
    Ok((a.crop(width, height)?, b.crop(width, height)?))
}
