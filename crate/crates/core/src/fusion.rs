//! Transform-domain fusion of two registered images.
//!
//! Both inputs are decomposed with the same Haar pyramid, combined
//! coefficient by coefficient, and the combined pyramid is inverted. Every
//! rule treats the LL band and the detail bands alike.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pixelio::GrayImage;
use crate::wavelet::{dwt2, idwt2, TransformMode, WaveletPyramid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionRule {
    Averaging,
    /// Keep the coefficient of larger magnitude, sign included.
    Maximum,
    /// Keep the coefficient of smaller magnitude, sign included.
    Minimum,
    /// Global principal-component weighting, see [`pca_weights`].
    Pca,
}

impl FromStr for FusionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "avg" | "average" | "averaging" => Ok(Self::Averaging),
            "max" | "maximum" => Ok(Self::Maximum),
            "min" | "minimum" => Ok(Self::Minimum),
            "pca" => Ok(Self::Pca),
            other => Err(Error::Argument(format!("unknown fusion rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcaWeights {
    pub a1: f64,
    pub a2: f64,
    /// Set when the covariance gave no usable direction and `(0.5, 0.5)` was
    /// substituted.
    pub degenerate: bool,
}

impl PcaWeights {
    const EVEN: Self = Self {
        a1: 0.5,
        a2: 0.5,
        degenerate: true,
    };
}

#[inline]
pub fn combine_avg(c1: f64, c2: f64) -> f64 {
    (c1 + c2) / 2.0
}

/// Larger magnitude wins; ties go to `c1`.
#[inline]
pub fn combine_max(c1: f64, c2: f64) -> f64 {
    if c2.abs() > c1.abs() {
        c2
    } else {
        c1
    }
}

/// Smaller magnitude wins; ties go to `c1`.
#[inline]
pub fn combine_min(c1: f64, c2: f64) -> f64 {
    if c2.abs() < c1.abs() {
        c2
    } else {
        c1
    }
}

/// Weights from the principal eigenvector of the 2x2 covariance of the two
/// flattened images, normalized so the components sum to one.
pub fn pca_weights(img1: &GrayImage, img2: &GrayImage) -> Result<PcaWeights> {
    if img1.width() != img2.width() || img1.height() != img2.height() {
        return Err(Error::Shape(format!(
            "pca inputs differ: {}x{} vs {}x{}",
            img1.width(),
            img1.height(),
            img2.width(),
            img2.height()
        )));
    }
    let n = img1.pixels().len();
    if n < 2 {
        return Err(Error::Argument("pca needs at least two pixels".into()));
    }
    let (x, y) = (img1.pixels(), img2.pixels());
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mean_x, b - mean_y);
        sxx += da * da;
        sxy += da * db;
        syy += db * db;
    }
    let denom = (n - 1) as f64;
    Ok(principal_weights(sxx / denom, sxy / denom, syy / denom))
}

/// Principal direction of `[[a, b], [b, c]]`, normalized by component sum.
pub(crate) fn principal_weights(a: f64, b: f64, c: f64) -> PcaWeights {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 || !scale.is_finite() {
        return PcaWeights::EVEN;
    }
    let half_gap = (a - c) / 2.0;
    let lambda = (a + c) / 2.0 + half_gap.hypot(b);
    // pick the better-conditioned of the two equivalent eigenvector forms
    let (mut v1, mut v2) = if a >= c { (lambda - c, b) } else { (b, lambda - a) };
    if v1 + v2 < 0.0 {
        v1 = -v1;
        v2 = -v2;
    }
    let sum = v1 + v2;
    if sum <= f64::EPSILON * (v1.abs() + v2.abs()) || (b == 0.0 && a == c) {
        return PcaWeights::EVEN;
    }
    let a1 = v1 / sum;
    PcaWeights {
        a1,
        a2: 1.0 - a1,
        degenerate: false,
    }
}

/// Applies `rule` to two pyramids of identical shape.
pub fn fuse_pyramids(
    p1: &WaveletPyramid,
    p2: &WaveletPyramid,
    rule: FusionRule,
    pca: Option<PcaWeights>,
) -> Result<WaveletPyramid> {
    if p1.width() != p2.width()
        || p1.height() != p2.height()
        || p1.levels() != p2.levels()
        || p1.mode() != p2.mode()
    {
        return Err(Error::Shape("pyramids differ in shape or mode".into()));
    }
    let weights = match (rule, pca) {
        (FusionRule::Pca, Some(w)) => w,
        (FusionRule::Pca, None) => {
            return Err(Error::Argument("pca rule needs weights".into()));
        }
        _ => PcaWeights::EVEN,
    };
    let integer = p1.mode() == TransformMode::IntegerLifting;
    let coeffs = p1
        .coeffs()
        .iter()
        .zip(p2.coeffs())
        .map(|(&c1, &c2)| {
            let v = match rule {
                FusionRule::Averaging => combine_avg(c1, c2),
                FusionRule::Maximum => combine_max(c1, c2),
                FusionRule::Minimum => combine_min(c1, c2),
                FusionRule::Pca => weights.a1 * c1 + weights.a2 * c2,
            };
            // the S-transform inverse is only exact on integers
            if integer {
                v.round()
            } else {
                v
            }
        })
        .collect();
    WaveletPyramid::from_parts(p1.width(), p1.height(), p1.levels(), p1.mode(), coeffs)
}

/// Fuses two same-sized images. Crop with
/// [`crop_to_common`](crate::pixelio::crop_to_common) first if needed.
pub fn fuse(
    img1: &GrayImage,
    img2: &GrayImage,
    rule: FusionRule,
    levels: u8,
    mode: TransformMode,
) -> Result<GrayImage> {
    if img1.width() != img2.width() || img1.height() != img2.height() {
        return Err(Error::Shape(format!(
            "cannot fuse {}x{} with {}x{}",
            img1.width(),
            img1.height(),
            img2.width(),
            img2.height()
        )));
    }
    let pca = match rule {
        FusionRule::Pca => Some(pca_weights(img1, img2)?),
        _ => None,
    };
    let p1 = dwt2(img1, levels, mode)?;
    let p2 = dwt2(img2, levels, mode)?;
    idwt2(&fuse_pyramids(&p1, &p2, rule, pca)?)
}
