//! Distortion, rate, and entropy measures, plus the CSV report writer.

use std::collections::BTreeMap;
use std::io::Write;

use crate::bitstream::{CoderKind, SpihtBitstream};
use crate::error::{Error, Result};
use crate::pixelio::GrayImage;

/// Peak value for 8-bit images.
pub const PEAK: f64 = 255.0;

/// How real samples are mapped to symbols before counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Binning {
    /// Round to the nearest integer, unbounded alphabet.
    #[default]
    Integer,
    /// Round, then clamp to `[0, 255]`.
    Pixel256,
}

fn check_same_shape(a: &GrayImage, b: &GrayImage) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::Shape(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_same_shape(a, b)?;
    Ok(mse_slices(a.pixels(), b.pixels()))
}

pub fn mse_slices(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    sum / a.len() as f64
}

/// `10 log10(255^2 / mse)`; `+inf` when the images are identical.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / mse).log10()
    }
}

/// Shannon entropy in bits per symbol of the empirical distribution.
pub fn entropy(values: &[f64], binning: Binning) -> f64 {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &v in values {
        let mut symbol = v.round() as i64;
        if binning == Binning::Pixel256 {
            symbol = symbol.clamp(0, 255);
        }
        *counts.entry(symbol).or_default() += 1;
    }
    entropy_of_counts(counts.values().copied())
}

pub(crate) fn entropy_of_counts(counts: impl Iterator<Item = usize> + Clone) -> f64 {
    let total: usize = counts.clone().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let h: f64 = counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    // a single symbol yields -0.0
    h.max(0.0)
}

/// Original bytes (one per pixel) over every byte of the stream.
pub fn compression_ratio(original: &GrayImage, bs: &SpihtBitstream) -> f64 {
    (original.width() * original.height()) as f64 / bs.total_bytes() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    /// `+inf` for a lossless reconstruction.
    pub psnr_db: f64,
    pub mse: f64,
    pub cr: f64,
    /// Entropy of the decoded image over the 256 pixel levels.
    pub entropy_bits: f64,
}

impl MetricsReport {
    pub fn measure(original: &GrayImage, decoded: &GrayImage, bs: &SpihtBitstream) -> Result<Self> {
        let mse = mse(original, decoded)?;
        Ok(Self {
            psnr_db: psnr_from_mse(mse),
            mse,
            cr: compression_ratio(original, bs),
            entropy_bits: entropy(decoded.pixels(), Binning::Pixel256),
        })
    }
}

/// One row of the `image,coder,budget_bits,psnr_db,mse,cr,entropy_bits` report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub image: String,
    pub coder: String,
    /// `None` for an unbounded budget.
    pub budget_bits: Option<u64>,
    pub metrics: MetricsReport,
}

pub const REPORT_HEADER: [&str; 7] =
    ["image", "coder", "budget_bits", "psnr_db", "mse", "cr", "entropy_bits"];

pub fn coder_name(kind: CoderKind) -> &'static str {
    match kind {
        CoderKind::Spiht => "spiht",
        CoderKind::Remspiht => "remspiht",
    }
}

fn fmt_real(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.6}")
    }
}

/// Writes the header followed by one line per row.
pub fn write_report<W: Write>(out: W, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(REPORT_HEADER).map_err(csv_err)?;
    for row in rows {
        let m = &row.metrics;
        w.write_record([
            row.image.clone(),
            row.coder.clone(),
            row.budget_bits.map_or_else(|| "unbounded".to_owned(), |b| b.to_string()),
            fmt_real(m.psnr_db),
            fmt_real(m.mse),
            fmt_real(m.cr),
            fmt_real(m.entropy_bits),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
