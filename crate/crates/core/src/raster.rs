//! Raster types shared by every metric.
//!
//! All rasters are row-major with index `row * width + col`.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Lower floor of the adaptive threshold; keeps an all-zero map from
/// binarizing to an all-one mask.
pub const THRESHOLD_FLOOR: f64 = 1e-9;

/// A pixel position as `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PixelCoord {
    pub row: usize,
    pub col: usize,
}

impl PixelCoord {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidRaster("width and height must be at least 1"));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidRaster("value count does not match width x height"));
    }
    Ok(())
}

/// A real-valued prediction map with every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl GrayMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidRaster("gray values must lie in [0, 1]"));
        }
        Ok(Self { width, height, values })
    }

    /// Builds a map from `f(row, col)`; values are clamped into `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_dims(width, height, width.saturating_mul(height))?;
        let mut values = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                let v = f(r, c);
                values.push(if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) });
            }
        }
        Ok(Self { width, height, values })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, alloc::vec![value; width.saturating_mul(height)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    /// Same dimensions, every value replaced by `f(value)` and clamped.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        let values = self.values.iter().map(|&v| f(v).clamp(0.0, 1.0)).collect();
        Self { width: self.width, height: self.height, values }
    }

    pub fn flip_horizontal(&self) -> Self {
        let (h, w) = self.dims();
        Self::from_fn(w, h, |r, c| self.get(r, w - 1 - c)).expect("dims preserved")
    }

    pub fn flip_vertical(&self) -> Self {
        let (h, w) = self.dims();
        Self::from_fn(w, h, |r, c| self.get(h - 1 - r, c)).expect("dims preserved")
    }
}

impl From<&BinaryMask> for GrayMap {
    fn from(mask: &BinaryMask) -> Self {
        let values = mask.values.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self { width: mask.width, height: mask.height, values }
    }
}

/// A binary ground-truth (or binarized prediction) mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    values: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, values: Vec<bool>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        Ok(Self { width, height, values })
    }

    /// Accepts `0`/`1` bytes; anything else is rejected.
    pub fn from_bits(width: usize, height: usize, bits: &[u8]) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidRaster("binary values must be 0 or 1"));
        }
        Self::new(width, height, bits.iter().map(|&b| b == 1).collect())
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        check_dims(width, height, width.saturating_mul(height))?;
        let mut values = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        Ok(Self { width, height, values })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, alloc::vec![false; width.saturating_mul(height)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.values[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.values.iter().any(|&b| b)
    }

    /// Fraction of foreground pixels.
    pub fn mean(&self) -> f64 {
        self.count() as f64 / self.values.len() as f64
    }

    pub fn foreground_pixels(&self) -> Vec<PixelCoord> {
        foreground_pixels(self)
    }

    /// Pixelwise `self AND NOT other`.
    pub fn difference(&self, other: &BinaryMask) -> Result<Self> {
        ensure_same_dims(self.dims(), other.dims())?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a && !b).collect();
        Ok(Self { width: self.width, height: self.height, values })
    }

    pub fn complement(&self) -> Self {
        let values = self.values.iter().map(|&b| !b).collect();
        Self { width: self.width, height: self.height, values }
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.values.iter().zip(&other.values).all(|(&a, &b)| !a || b)
    }

    pub fn flip_horizontal(&self) -> Self {
        let (h, w) = self.dims();
        Self::from_fn(w, h, |r, c| self.get(r, w - 1 - c)).expect("dims preserved")
    }

    pub fn flip_vertical(&self) -> Self {
        let (h, w) = self.dims();
        Self::from_fn(w, h, |r, c| self.get(h - 1 - r, c)).expect("dims preserved")
    }

    /// Nearest-neighbour resampling to `width x height`; the result stays binary.
    pub fn resize_nearest(&self, width: usize, height: usize) -> Result<Self> {
        let (sh, sw) = self.dims();
        Self::from_fn(width, height, |r, c| {
            let sr = (r * sh / height).min(sh - 1);
            let sc = (c * sw / width).min(sw - 1);
            self.get(sr, sc)
        })
    }
}

/// An 8-bit sRGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self { width, height, pixels })
    }

    /// Interleaved `RGBRGB...` bytes.
    pub fn from_interleaved(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if !bytes.len().is_multiple_of(3) {
            return Err(Error::InvalidRaster("interleaved RGB length must be a multiple of 3"));
        }
        let pixels = bytes.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
        Self::new(width, height, pixels)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Result<Self> {
        check_dims(width, height, width.saturating_mul(height))?;
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }
}

/// A real-valued per-pixel field without the `[0, 1]` invariant of
/// [`GrayMap`]. Convolution outputs and loop terms are fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        Ok(Self { width, height, values })
    }

    pub(crate) fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, values: alloc::vec![0.0; width * height] }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn ensure_same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::dims(a, b))
    }
}

/// Adaptive threshold `min(2 * mean, 1 - 1e-9)`, floored at [`THRESHOLD_FLOOR`].
pub fn adaptive_threshold(x: &GrayMap) -> f64 {
    let tau = (2.0 * x.mean()).min(1.0 - THRESHOLD_FLOOR);
    tau.max(THRESHOLD_FLOOR)
}

/// Binarizes a prediction with the 2x-mean adaptive threshold.
pub fn binarize_adaptive(x: &GrayMap) -> BinaryMask {
    let tau = adaptive_threshold(x);
    let values = x.values.iter().map(|&v| v >= tau).collect();
    BinaryMask { width: x.width, height: x.height, values }
}

/// Foreground coordinates in row-major order.
pub fn foreground_pixels(y: &BinaryMask) -> Vec<PixelCoord> {
    y.values
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| PixelCoord::new(i / y.width, i % y.width))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_bad_rasters() {
        assert!(GrayMap::new(0, 3, vec![]).is_err());
        assert!(GrayMap::new(2, 2, vec![0.0; 3]).is_err());
        assert!(GrayMap::new(1, 1, vec![1.5]).is_err());
        assert!(GrayMap::new(1, 1, vec![f64::NAN]).is_err());
        assert!(BinaryMask::from_bits(2, 1, &[0, 2]).is_err());
        assert!(RgbImage::from_interleaved(1, 1, &[1, 2]).is_err());
    }

    #[test]
    fn constant_map_binarizes_to_zero() {
        let x = GrayMap::constant(6, 5, 0.4).unwrap();
        assert!(binarize_adaptive(&x).is_empty());
    }

    #[test]
    fn single_bright_pixel_survives_threshold() {
        let x = GrayMap::from_fn(10, 10, |r, c| if (r, c) == (3, 7) { 1.0 } else { 0.0 }).unwrap();
        let m = binarize_adaptive(&x);
        assert_eq!(m.foreground_pixels(), vec![PixelCoord::new(3, 7)]);
    }

    #[test]
    fn all_ones_and_all_zeros() {
        let ones = GrayMap::constant(4, 4, 1.0).unwrap();
        assert_eq!(binarize_adaptive(&ones).count(), 16);
        let zeros = GrayMap::constant(4, 4, 0.0).unwrap();
        assert!(binarize_adaptive(&zeros).is_empty());
    }

    #[test]
    fn foreground_enumeration() {
        assert!(BinaryMask::zeros(3, 3).unwrap().foreground_pixels().is_empty());
        let full = BinaryMask::from_fn(2, 2, |_, _| true).unwrap();
        assert_eq!(
            full.foreground_pixels(),
            vec![PixelCoord::new(0, 0), PixelCoord::new(0, 1), PixelCoord::new(1, 0), PixelCoord::new(1, 1)]
        );
        let checker = BinaryMask::from_fn(4, 4, |r, c| (r + c) % 2 == 0).unwrap();
        let fg = checker.foreground_pixels();
        assert_eq!(fg.len(), 8);
        assert_eq!(fg[0], PixelCoord::new(0, 0));
        assert_eq!(fg[1], PixelCoord::new(0, 2));
        assert_eq!(fg[2], PixelCoord::new(1, 1));
    }

    #[test]
    fn nearest_resize_keeps_binarity() {
        let m = BinaryMask::from_fn(4, 4, |r, c| r < 2 && c < 2).unwrap();
        let up = m.resize_nearest(8, 8).unwrap();
        assert_eq!(up.count(), 16);
        let down = m.resize_nearest(2, 2).unwrap();
        assert_eq!(down.count(), 1);
        assert!(down.get(0, 0));
    }
}
