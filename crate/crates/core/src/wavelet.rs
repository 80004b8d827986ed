//! Separable 2D Haar transform in the nested (Mallat) quadrant layout.
//!
//! Each level filters rows, then columns, of the current low-pass region and
//! writes the result back in place: the low half of each axis goes first.
//! After `L` levels the grid holds `LL` in the top-left
//! `(w / 2^L) x (h / 2^L)` block, surrounded by the detail quadrants of every
//! level, coarsest innermost:
//!
//! ```text
//! +-----+-----+-----------+
//! | LL  | HL2 |           |
//! +-----+-----+    HL1    |
//! | LH2 | HH2 |           |
//! +-----+-----+-----------+
//! |           |           |
//! |    LH1    |    HH1    |
//! |           |           |
//! +-----------+-----------+
//! ```
//!
//! Level 1 is the finest. `HL` is the upper-right quadrant (high-pass along
//! rows), `LH` the lower-left.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::pixelio::GrayImage;

/// Which Haar variant produced a pyramid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransformMode {
    /// Integer-to-integer S-transform: `s = floor((a + b) / 2)`, `d = a - b`.
    #[default]
    IntegerLifting,
    /// Orthonormal pair `((a + b) / sqrt 2, (a - b) / sqrt 2)`.
    OrthonormalFloat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    LL,
    LH,
    HL,
    HH,
}

/// A subband label. `level` is 1 for the finest detail bands and `L` for the
/// coarsest; `LL` carries `level == L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Subband {
    pub band: Band,
    pub level: u8,
}

/// One step of the 1D forward kernel.
#[inline]
pub fn haar_forward(a: f64, b: f64, mode: TransformMode) -> (f64, f64) {
    match mode {
        TransformMode::IntegerLifting => (((a + b) / 2.0).floor(), a - b),
        TransformMode::OrthonormalFloat => {
            ((a + b) * std::f64::consts::FRAC_1_SQRT_2, (a - b) * std::f64::consts::FRAC_1_SQRT_2)
        }
    }
}

/// Inverse of [`haar_forward`].
#[inline]
pub fn haar_inverse(s: f64, d: f64, mode: TransformMode) -> (f64, f64) {
    match mode {
        TransformMode::IntegerLifting => {
            let a = s + (d / 2.0).ceil();
            (a, a - d)
        }
        TransformMode::OrthonormalFloat => {
            ((s + d) * std::f64::consts::FRAC_1_SQRT_2, (s - d) * std::f64::consts::FRAC_1_SQRT_2)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    width: usize,
    height: usize,
    levels: u8,
    mode: TransformMode,
    coeffs: Vec<f64>,
}

/// Checks that `width x height` can carry `levels` decompositions with an LL
/// band that still tiles into 2x2 root groups.
pub fn check_dimensions(width: usize, height: usize, levels: u8) -> Result<()> {
    if levels == 0 {
        return Err(Error::Shape("at least one decomposition level is required".into()));
    }
    if levels > 15 {
        return Err(Error::Shape(format!("{levels} levels is too deep")));
    }
    let unit = 1usize << (levels + 1);
    if width == 0 || height == 0 || !width.is_multiple_of(unit) || !height.is_multiple_of(unit) {
        return Err(Error::Shape(format!(
            "{width}x{height} is not divisible by 2^{} = {unit} for {levels} levels",
            levels + 1
        )));
    }
    Ok(())
}

impl WaveletPyramid {
    pub fn from_parts(
        width: usize,
        height: usize,
        levels: u8,
        mode: TransformMode,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        check_dimensions(width, height, levels)?;
        if coeffs.len() != width * height {
            return Err(Error::Shape(format!(
                "{} coefficients for a {width}x{height} grid",
                coeffs.len()
            )));
        }
        Ok(Self {
            width,
            height,
            levels,
            mode,
            coeffs,
        })
    }

    pub fn zeros(width: usize, height: usize, levels: u8, mode: TransformMode) -> Result<Self> {
        Self::from_parts(width, height, levels, mode, vec![0.0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> u8 {
        self.levels
    }

    pub fn mode(&self) -> TransformMode {
        self.mode
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.coeffs[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.coeffs[row * self.width + col] = value;
    }

    /// `(height, width)` of the LL band.
    pub fn ll_dims(&self) -> (usize, usize) {
        (self.height >> self.levels, self.width >> self.levels)
    }

    pub fn is_ll(&self, row: usize, col: usize) -> bool {
        let (lh, lw) = self.ll_dims();
        row < lh && col < lw
    }

    /// Same grid, every coefficient mapped through `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
            ..self.clone()
        }
    }

    /// Subband and level of a coordinate.
    pub fn subband_of(&self, row: usize, col: usize) -> Result<Subband> {
        if row >= self.height || col >= self.width {
            return Err(Error::Index {
                row,
                col,
                height: self.height,
                width: self.width,
            });
        }
        Ok(self.subband_unchecked(row, col))
    }

    pub(crate) fn subband_unchecked(&self, row: usize, col: usize) -> Subband {
        for level in 1..=self.levels {
            let h = self.height >> level;
            let w = self.width >> level;
            let band = match (row >= h, col >= w) {
                (false, false) => continue,
                (false, true) => Band::HL,
                (true, false) => Band::LH,
                (true, true) => Band::HH,
            };
            return Subband { band, level };
        }
        Subband {
            band: Band::LL,
            level: self.levels,
        }
    }

    /// Plain-text dump, one grid row per line, space-separated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.coeffs.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|c| format!("{c}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

/// Forward transform of `img` to `levels` levels.
pub fn dwt2(img: &GrayImage, levels: u8, mode: TransformMode) -> Result<WaveletPyramid> {
    let (width, height) = (img.width(), img.height());
    check_dimensions(width, height, levels)?;
    let mut grid = img.pixels().to_vec();
    let mut scratch = vec![0.0; width.max(height)];

    for level in 0..levels {
        let h = height >> level;
        let w = width >> level;
        for row in 0..h {
            let line = &mut grid[row * width..row * width + w];
            forward_line(line, &mut scratch[..w], mode);
        }
        for col in 0..w {
            let mut column: Vec<f64> = (0..h).map(|r| grid[r * width + col]).collect();
            forward_line(&mut column, &mut scratch[..h], mode);
            for (r, v) in column.into_iter().enumerate() {
                grid[r * width + col] = v;
            }
        }
    }
    WaveletPyramid::from_parts(width, height, levels, mode, grid)
}

/// Inverse transform back to the pixel domain.
pub fn idwt2(pyr: &WaveletPyramid) -> Result<GrayImage> {
    let (width, height) = (pyr.width, pyr.height);
    check_dimensions(width, height, pyr.levels)?;
    if pyr.coeffs.len() != width * height {
        return Err(Error::Shape("coefficient count does not match grid".into()));
    }
    let mut grid = pyr.coeffs.clone();
    let mut scratch = vec![0.0; width.max(height)];

    for level in (0..pyr.levels).rev() {
        let h = height >> level;
        let w = width >> level;
        for col in 0..w {
            let mut column: Vec<f64> = (0..h).map(|r| grid[r * width + col]).collect();
            inverse_line(&mut column, &mut scratch[..h], pyr.mode);
            for (r, v) in column.into_iter().enumerate() {
                grid[r * width + col] = v;
            }
        }
        for row in 0..h {
            let line = &mut grid[row * width..row * width + w];
            inverse_line(line, &mut scratch[..w], pyr.mode);
        }
    }
    GrayImage::new(width, height, grid)
}

fn forward_line(line: &mut [f64], scratch: &mut [f64], mode: TransformMode) {
    let half = line.len() / 2;
    for k in 0..half {
        let (s, d) = haar_forward(line[2 * k], line[2 * k + 1], mode);
        scratch[k] = s;
        scratch[half + k] = d;
    }
    line.copy_from_slice(scratch);
}

fn inverse_line(line: &mut [f64], scratch: &mut [f64], mode: TransformMode) {
    let half = line.len() / 2;
    for k in 0..half {
        let (a, b) = haar_inverse(line[k], line[half + k], mode);
        scratch[2 * k] = a;
        scratch[2 * k + 1] = b;
    }
    line.copy_from_slice(scratch);
}
