//! Pixel-level camouflage degree.
//!
//! Stage one repaints the object from its surroundings: the ground truth is
//! dilated by `k` pixels to obtain a context band, `N x N` patches are taken
//! from both regions and embedded as flattened Lab values plus standardized
//! anchor coordinates scaled by `lambda`, and every object patch is replaced
//! by its nearest context patch. Stage two maps the CIEDE2000 difference
//! between the repainted and original object through
//! `D = (exp(gamma * (1 - dE / 100)) - 1) / (exp(gamma) - 1)`.

pub mod ann;

use alloc::vec;
use alloc::vec::Vec;

use libm::{expm1, sqrt};

use crate::colorimetry::{ciede2000_clamped, rgb_to_lab, Lab, LabImage};
use crate::morphology::{dilate, nearest_feature};
use crate::raster::{ensure_same_dims, BinaryMask, PixelCoord, RgbImage};
use crate::{Error, Result};

pub use ann::nn_match;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CamoParams {
    /// Width `k` of the context band, in pixels.
    pub band_width: usize,
    /// Patch side `N`.
    pub patch_size: usize,
    /// Overlap between neighbouring patches; the anchor stride is
    /// `patch_size - overlap`.
    pub overlap: usize,
    /// Scale of the standardized coordinates in the descriptor.
    pub lambda: f64,
    /// Nonlinearity of the colour-difference mapping.
    pub gamma: f64,
    /// Approximation factor for the nearest-neighbour search; 0 is exact.
    pub eps: f64,
    /// Use every anchor (stride 1) instead of `patch_size - overlap`.
    pub dense: bool,
}

impl Default for CamoParams {
    fn default() -> Self {
        Self { band_width: 20, patch_size: 7, overlap: 3, lambda: 20.0, gamma: 8.0, eps: 0.0, dense: false }
    }
}

impl CamoParams {
    pub fn stride(&self) -> usize {
        if self.dense {
            1
        } else {
            self.patch_size - self.overlap
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size == 0 || self.overlap >= self.patch_size {
            return Err(Error::InvalidParameter("need 0 <= overlap < patch_size"));
        }
        if self.band_width == 0 {
            return Err(Error::InvalidParameter("band width must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter("gamma must be positive"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter("lambda must be non-negative"));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter("eps must be non-negative"));
        }
        Ok(())
    }
}

/// Camouflage degree per pixel, in `[0, 1]` and zero off the object.
#[derive(Debug, Clone, PartialEq)]
pub struct CamoMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl CamoMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(values.len()) {
            return Err(Error::InvalidRaster("camouflage map dimensions do not match value count"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidRaster("camouflage values must lie in [0, 1]"));
        }
        Ok(Self { width, height, values })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0.0; width.saturating_mul(height)])
    }

    /// `value` on every foreground pixel of `y`, zero elsewhere.
    pub fn uniform_on(y: &BinaryMask, value: f64) -> Result<Self> {
        let values = y.values().iter().map(|&b| if b { value } else { 0.0 }).collect();
        Self::new(y.width(), y.height(), values)
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

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

/// The `k`-pixel ring around the object: `dilate(y, k) \ y`.
pub fn context_band(y: &BinaryMask, k: usize) -> Result<BinaryMask> {
    if y.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("band width must be at least 1"));
    }
    let band = dilate(y, k).difference(y)?;
    if band.is_empty() {
        return Err(Error::EmptyContext);
    }
    Ok(band)
}

/// A patch embedding: `3 N^2` Lab values (row-major, `L a b` per pixel)
/// followed by the two scaled standardized anchor coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchDescriptor {
    pub vector: Vec<f64>,
    /// Top-left pixel of the patch.
    pub anchor: PixelCoord,
}

impl AsRef<[f64]> for PatchDescriptor {
    fn as_ref(&self) -> &[f64] {
        &self.vector
    }
}

fn standardize(values: &mut [f64]) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = sqrt(var);
    for v in values.iter_mut() {
        *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
    }
}

/// Patches on the anchor grid whose centre pixel lies in `region` and whose
/// extent lies fully inside the frame.
pub fn extract_patches(img: &LabImage, region: &BinaryMask, params: &CamoParams) -> Result<Vec<PatchDescriptor>> {
    params.validate()?;
    ensure_same_dims(img.dims(), region.dims())?;
    let (h, w) = img.dims();
    let n = params.patch_size;
    if n > h || n > w {
        return Err(Error::NoValidPatches);
    }
    let half = n / 2;
    let stride = params.stride();
    let mut anchors = Vec::new();
    for r in (0..=h - n).step_by(stride) {
        for c in (0..=w - n).step_by(stride) {
            if region.get(r + half, c + half) {
                anchors.push(PixelCoord::new(r, c));
            }
        }
    }
    if anchors.is_empty() {
        return Err(Error::NoValidPatches);
    }
    let mut rows: Vec<f64> = anchors.iter().map(|a| a.row as f64).collect();
    let mut cols: Vec<f64> = anchors.iter().map(|a| a.col as f64).collect();
    standardize(&mut rows);
    standardize(&mut cols);

    let len = 3 * n * n + 2;
    Ok(anchors
        .iter()
        .enumerate()
        .map(|(i, &anchor)| {
            let mut vector = Vec::with_capacity(len);
            for dr in 0..n {
                for dc in 0..n {
                    let p = img.get(anchor.row + dr, anchor.col + dc);
                    vector.extend_from_slice(&[p.l, p.a, p.b]);
                }
            }
            vector.push(rows[i] * params.lambda);
            vector.push(cols[i] * params.lambda);
            PatchDescriptor { vector, anchor }
        })
        .collect())
}

/// Result of repainting the object from matched context patches.
#[derive(Debug, Clone, PartialEq)]
pub struct Overpainting {
    pub repainted: LabImage,
    /// Number of matched patches covering each pixel (object pixels only).
    pub coverage: Vec<u32>,
}

impl Overpainting {
    pub fn covered(&self) -> Vec<bool> {
        self.coverage.iter().map(|&c| c > 0).collect()
    }
}

/// Copies every matched context patch onto its object patch and averages
/// overlapping contributions. Only object pixels change; pixels without
/// any contribution keep their original value.
///
/// `matches` pairs object-patch anchors with context-patch anchors.
pub fn overpaint(
    img: &LabImage,
    y: &BinaryMask,
    matches: &[(PixelCoord, PixelCoord)],
    patch_size: usize,
) -> Result<Overpainting> {
    ensure_same_dims(img.dims(), y.dims())?;
    let (h, w) = img.dims();
    let mut repainted = img.clone();
    let mut coverage = vec![0u32; h * w];
    for &(obj, ctx) in matches {
        if obj.row + patch_size > h || obj.col + patch_size > w || ctx.row + patch_size > h || ctx.col + patch_size > w {
            return Err(Error::InvalidParameter("patch anchor out of frame"));
        }
        for dr in 0..patch_size {
            for dc in 0..patch_size {
                let (r, c) = (obj.row + dr, obj.col + dc);
                if !y.get(r, c) {
                    continue;
                }
                let src = img.get(ctx.row + dr, ctx.col + dc);
                let i = r * w + c;
                coverage[i] += 1;
                // running mean, exact when all contributions agree
                let p = &mut repainted.pixels_mut()[i];
                if coverage[i] == 1 {
                    *p = src;
                } else {
                    let n = f64::from(coverage[i]);
                    *p = Lab::new(p.l + (src.l - p.l) / n, p.a + (src.a - p.a) / n, p.b + (src.b - p.b) / n);
                }
            }
        }
    }
    Ok(Overpainting { repainted, coverage })
}

/// Maps a colour difference in `[0, 100]` to a camouflage degree in `[0, 1]`.
pub fn camo_degree(delta: f64, gamma: f64) -> f64 {
    let delta = delta.clamp(0.0, 100.0);
    if delta == 0.0 {
        return 1.0;
    }
    if delta == 100.0 {
        return 0.0;
    }
    (expm1(gamma * (1.0 - delta / 100.0)) / expm1(gamma)).clamp(0.0, 1.0)
}

/// Per object pixel: `D = camo_degree(dE00(R, I))`; zero off the object.
pub fn camouflage_map(repainted: &LabImage, original: &LabImage, y: &BinaryMask, gamma: f64) -> Result<CamoMap> {
    ensure_same_dims(repainted.dims(), original.dims())?;
    ensure_same_dims(original.dims(), y.dims())?;
    let values = repainted
        .pixels()
        .iter()
        .zip(original.pixels())
        .zip(y.values())
        .map(|((&r, &i), &yv)| if yv { camo_degree(ciede2000_clamped(r, i), gamma) } else { 0.0 })
        .collect();
    CamoMap::new(y.width(), y.height(), values)
}

/// Intermediate products of [`quantify`], kept for inspection and export.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantification {
    pub map: CamoMap,
    pub band: BinaryMask,
    pub overpainting: Overpainting,
    /// Colour difference per pixel after filling uncovered object pixels;
    /// zero off the object.
    pub delta: Vec<f64>,
}

/// Camouflage map of the object `y` in `img`.
pub fn quantify(img: &RgbImage, y: &BinaryMask, params: &CamoParams) -> Result<CamoMap> {
    quantify_detailed(img, y, params).map(|q| q.map)
}

pub fn quantify_detailed(img: &RgbImage, y: &BinaryMask, params: &CamoParams) -> Result<Quantification> {
    params.validate()?;
    ensure_same_dims(img.dims(), y.dims())?;
    let lab = rgb_to_lab(img);
    quantify_lab(&lab, y, params)
}

pub fn quantify_lab(lab: &LabImage, y: &BinaryMask, params: &CamoParams) -> Result<Quantification> {
    let band = context_band(y, params.band_width)?;
    let object = extract_patches(lab, y, params)?;
    let context = extract_patches(lab, &band, params)?;
    let nearest = nn_match(&object, &context, params.eps)?;
    let matches: Vec<(PixelCoord, PixelCoord)> =
        object.iter().zip(&nearest).map(|(o, &j)| (o.anchor, context[j].anchor)).collect();
    let overpainting = overpaint(lab, y, &matches, params.patch_size)?;

    let (h, w) = y.dims();
    let covered = overpainting.covered();
    let mut delta = vec![0.0; h * w];
    for (i, d) in delta.iter_mut().enumerate() {
        if covered[i] {
            *d = ciede2000_clamped(overpainting.repainted.pixels()[i], lab.pixels()[i]);
        }
    }
    // Object pixels no patch reached take the difference of the nearest
    // covered pixel.
    if y.values().iter().zip(&covered).any(|(&yv, &c)| yv && !c) {
        let nearest = nearest_feature(&covered, h, w);
        for i in 0..h * w {
            if y.values()[i] && !covered[i] {
                if let Some((src, _)) = nearest[i] {
                    delta[i] = delta[src];
                }
            }
        }
    }
    let values = delta
        .iter()
        .zip(y.values())
        .map(|(&d, &yv)| if yv { camo_degree(d, params.gamma) } else { 0.0 })
        .collect();
    let map = CamoMap::new(w, h, values)?;
    Ok(Quantification { map, band, overpainting, delta })
}
