#![allow(dead_code)]

pub mod reference;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavefuse::pixelio::GrayImage;
use wavefuse::wavelet::WaveletPyramid;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut r = rng(seed);
    GrayImage::from_fn(width, height, |_, _| f64::from(r.random_range(0..=255u8))).unwrap()
}

/// Smooth ramp with a little noise.
pub fn gradient_image(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut r = rng(seed);
    GrayImage::from_fn(width, height, |row, col| {
        let base = ((row * 3 + col * 2) * 200 / (3 * height + 2 * width)) as f64;
        (base + f64::from(r.random_range(0..8u8))).min(255.0)
    })
    .unwrap()
}

/// Two textures stacked vertically: broadband noise in the first
/// `busy_rows` rows, a one-pixel 20/230 checkerboard with faint noise below.
pub fn mosaic(size: usize, busy_rows: usize, seed: u64) -> GrayImage {
    let mut r = rng(seed);
    GrayImage::from_fn(size, size, |row, col| {
        if row < busy_rows {
            f64::from(r.random_range(0..=255u8))
        } else {
            let cell = if (row + col) % 2 == 0 { 20.0 } else { 230.0 };
            cell + f64::from(r.random_range(0..4u8))
        }
    })
    .unwrap()
}

/// Integer values in `[-span, span]`, already in pyramid layout.
pub fn random_int_pyramid(width: usize, height: usize, levels: u8, span: i64, seed: u64) -> WaveletPyramid {
    let mut r = rng(seed);
    let coeffs = (0..width * height).map(|_| r.random_range(-span..=span) as f64).collect();
    WaveletPyramid::from_parts(width, height, levels, wavefuse::wavelet::TransformMode::IntegerLifting, coeffs)
        .unwrap()
}

pub fn as_rows(pyr: &WaveletPyramid) -> Vec<Vec<i64>> {
    pyr.coeffs().chunks(pyr.width()).map(|row| row.iter().map(|&v| v as i64).collect()).collect()
}

pub fn mask_rows(mask: &[bool], width: usize) -> Vec<Vec<bool>> {
    mask.chunks(width).map(<[bool]>::to_vec).collect()
}

pub fn payload_bits(bs: &wavefuse::bitstream::SpihtBitstream) -> Vec<bool> {
    (0..bs.bit_count()).map(|i| bs.bit(i)).collect()
}

pub fn masked_mse(a: &WaveletPyramid, b: &WaveletPyramid, mask: &[bool]) -> f64 {
    let (sum, n) = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .zip(mask)
        .filter(|(_, &m)| m)
        .fold((0.0, 0usize), |(s, n), ((x, y), _)| (s + (x - y) * (x - y), n + 1));
    sum / n.max(1) as f64
}
