//! Context-measure: forward inference, reverse deduction and their
//! harmonic combination.
//!
//! Forward inference credits every predicted pixel with its correlation mass
//! to the ground-truth foreground, `F = X * (K conv Y)`. Reverse deduction
//! asks how well each ground-truth pixel is explained by the prediction,
//! `R = e / (e - 1) * Y * (1 - exp(-(K conv X)))`, a first-order form of the
//! exact product `1 - prod_i (1 - X(p_i) P(p_i, q))` (see [`reverse_exact`]).

use alloc::vec::Vec;
use core::f64::consts::E;

use libm::exp;

use crate::camo::CamoMap;
use crate::correlation::{build_kernel, convolve, convolve_mask, shape_correlation, GaussianKernel, NormalizedCovariance};
use crate::raster::{ensure_same_dims, BinaryMask, Field, GrayMap};
use crate::{Error, Result};

/// `e / (e - 1)`, maps `1 - exp(-s)` for `s` in `[0, 1]` onto `[0, 1]`.
pub const REVERSE_NORMALIZER: f64 = E / (E - 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmParams {
    /// Kernel scale; the normalized covariance has trace `alpha^2`.
    pub alpha: f64,
    /// Balance between the forward and reverse terms.
    pub beta: f64,
}

impl CmParams {
    pub const fn generic() -> Self {
        Self { alpha: 6.0, beta: 1.0 }
    }

    pub const fn camouflaged() -> Self {
        Self { alpha: 6.0, beta: 1.2 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter("alpha must be positive"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter("beta must be positive"));
        }
        Ok(())
    }
}

impl Default for CmParams {
    fn default() -> Self {
        Self::generic()
    }
}

/// Per-pixel forward and reverse fields with their normalized totals.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopTerms {
    pub forward_map: Field,
    pub reverse_map: Field,
    /// `||F||_1 / ||X||_1`, zero for an empty prediction.
    pub f_m: f64,
    /// `||R||_1 / ||Y||_1`.
    pub r_m: f64,
}

/// `F = X * (K conv Y)`.
pub fn forward_inference(x: &GrayMap, y: &BinaryMask, k: &GaussianKernel) -> Result<Field> {
    ensure_same_dims(x.dims(), y.dims())?;
    let mut f = convolve_mask(y, k);
    for (v, &xv) in f.values_mut().iter_mut().zip(x.values()) {
        *v *= xv;
    }
    Ok(f)
}

/// Exact reverse term `1 - prod_i [1 - X(p_i) P(p_i, q)]` on the
/// ground-truth foreground, using the untruncated density.
///
/// Costs `O(|X_f| * |Y_f|)`; intended as a reference.
pub fn reverse_exact(x: &GrayMap, y: &BinaryMask, cov: &NormalizedCovariance) -> Result<Field> {
    ensure_same_dims(x.dims(), y.dims())?;
    let (h, w) = x.dims();
    let predicted: Vec<(f64, f64, f64)> = x
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, &v)| ((i / w) as f64, (i % w) as f64, v))
        .collect();
    let mut out = Field::zeros(w, h);
    let dst = out.values_mut();
    for (i, _) in y.values().iter().enumerate().filter(|(_, &b)| b) {
        let (qr, qc) = ((i / w) as f64, (i % w) as f64);
        let mut miss = 1.0;
        for &(pr, pc, v) in &predicted {
            miss *= 1.0 - v * cov.density(pr - qr, pc - qc);
        }
        dst[i] = 1.0 - miss;
    }
    Ok(out)
}

/// `R = e / (e - 1) * Y * (1 - exp(-(K conv X)))`, exactly zero off the
/// ground-truth foreground.
pub fn reverse_deduction(x: &GrayMap, y: &BinaryMask, k: &GaussianKernel) -> Result<Field> {
    ensure_same_dims(x.dims(), y.dims())?;
    let mut r = convolve(x, k);
    for (v, &yv) in r.values_mut().iter_mut().zip(y.values()) {
        *v = if yv { (REVERSE_NORMALIZER * (1.0 - exp(-*v))).clamp(0.0, 1.0) } else { 0.0 };
    }
    Ok(r)
}

/// The kernel a ground-truth mask induces at scale `alpha`.
pub fn kernel_for(y: &BinaryMask, alpha: f64) -> Result<GaussianKernel> {
    if y.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let cov = shape_correlation(y, alpha)?;
    build_kernel(&cov, y.dims())
}

/// Both loop fields and their normalized totals.
pub fn loop_terms(x: &GrayMap, y: &BinaryMask, params: &CmParams) -> Result<LoopTerms> {
    params.validate()?;
    ensure_same_dims(x.dims(), y.dims())?;
    let k = kernel_for(y, params.alpha)?;
    loop_terms_with_kernel(x, y, &k)
}

pub fn loop_terms_with_kernel(x: &GrayMap, y: &BinaryMask, k: &GaussianKernel) -> Result<LoopTerms> {
    let forward_map = forward_inference(x, y, k)?;
    let reverse_map = reverse_deduction(x, y, k)?;
    let x_mass = x.sum();
    let f_m = if x_mass > 0.0 { (forward_map.sum() / x_mass).clamp(0.0, 1.0) } else { 0.0 };
    let y_mass = y.count() as f64;
    if y_mass == 0.0 {
        return Err(Error::EmptyGroundTruth);
    }
    let r_m = (reverse_map.sum() / y_mass).clamp(0.0, 1.0);
    Ok(LoopTerms { forward_map, reverse_map, f_m, r_m })
}

/// `(1 + b^2) F R / (b^2 F + R)`, zero when both terms vanish.
pub fn harmonic(beta: f64, f_m: f64, r_m: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * f_m + r_m;
    if denom <= 0.0 {
        return 0.0;
    }
    ((1.0 + b2) * f_m * r_m / denom).clamp(0.0, 1.0)
}

/// Generic Context-measure of prediction `x` against ground truth `y`.
pub fn context_measure(x: &GrayMap, y: &BinaryMask, params: &CmParams) -> Result<f64> {
    let terms = loop_terms(x, y, params)?;
    Ok(harmonic(params.beta, terms.f_m, terms.r_m))
}

/// Reverse total weighted by `Y + D`.
pub fn weighted_reverse(reverse_map: &Field, y: &BinaryMask, d: &CamoMap) -> Result<f64> {
    ensure_same_dims(reverse_map.dims(), y.dims())?;
    ensure_same_dims(d.dims(), y.dims())?;
    let (mut num, mut den) = (0.0, 0.0);
    for ((&r, &yv), &dv) in reverse_map.values().iter().zip(y.values()).zip(d.values()) {
        if !yv {
            if dv != 0.0 {
                return Err(Error::InvalidParameter("camouflage map must vanish off the ground truth"));
            }
            continue;
        }
        let weight = 1.0 + dv;
        num += r * weight;
        den += weight;
    }
    if den <= 0.0 {
        return Err(Error::EmptyGroundTruth);
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// Camouflage-weighted Context-measure: the reverse term is averaged with
/// weights `Y + D`.
pub fn context_measure_camo(x: &GrayMap, y: &BinaryMask, d: &CamoMap, params: &CmParams) -> Result<f64> {
    let terms = loop_terms(x, y, params)?;
    let r_w = weighted_reverse(&terms.reverse_map, y, d)?;
    Ok(harmonic(params.beta, terms.f_m, r_w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(size: usize, cr: f64, cc: f64, radius: f64) -> BinaryMask {
        BinaryMask::from_fn(size, size, |r, c| {
            let (dr, dc) = (r as f64 - cr, c as f64 - cc);
            dr * dr + dc * dc <= radius * radius
        })
        .unwrap()
    }

    #[test]
    fn empty_prediction_scores_zero() {
        let y = disk(32, 16.0, 16.0, 5.0);
        let x = GrayMap::constant(32, 32, 0.0).unwrap();
        assert_eq!(context_measure(&x, &y, &CmParams::generic()).unwrap(), 0.0);
        let k = kernel_for(&y, 6.0).unwrap();
        assert!(forward_inference(&x, &y, &k).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(reverse_deduction(&x, &y, &k).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_ground_truth_is_an_error() {
        let y = BinaryMask::zeros(8, 8).unwrap();
        let x = GrayMap::constant(8, 8, 0.5).unwrap();
        assert_eq!(context_measure(&x, &y, &CmParams::generic()), Err(Error::EmptyGroundTruth));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let y = disk(16, 8.0, 8.0, 3.0);
        let x = GrayMap::constant(15, 16, 0.5).unwrap();
        assert!(matches!(context_measure(&x, &y, &CmParams::generic()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn far_miss_scores_zero() {
        let y = BinaryMask::from_fn(96, 96, |r, c| (4..10).contains(&r) && (4..10).contains(&c)).unwrap();
        let x = GrayMap::from_fn(96, 96, |r, c| if (80..90).contains(&r) && (80..90).contains(&c) { 1.0 } else { 0.0 })
            .unwrap();
        let k = kernel_for(&y, 6.0).unwrap();
        assert!(forward_inference(&x, &y, &k).unwrap().values().iter().all(|&v| v == 0.0));
        assert_eq!(context_measure(&x, &y, &CmParams::generic()).unwrap(), 0.0);
    }

    #[test]
    fn forward_bounded_by_prediction() {
        let y = disk(40, 20.0, 18.0, 9.0);
        let x = GrayMap::from_fn(40, 40, |r, c| ((r * 7 + c * 3) % 11) as f64 / 10.0).unwrap();
        let k = kernel_for(&y, 6.0).unwrap();
        let f = forward_inference(&x, &y, &k).unwrap();
        for (fv, xv) in f.values().iter().zip(x.values()) {
            assert!(*fv >= 0.0 && fv <= xv);
        }
        let r = reverse_deduction(&x, &y, &k).unwrap();
        for (rv, yv) in r.values().iter().zip(y.values()) {
            assert!((0.0..=1.0).contains(rv));
            if !yv {
                assert_eq!(*rv, 0.0);
            }
        }
    }

    #[test]
    fn reverse_exact_single_pixel() {
        let y = disk(21, 10.0, 10.0, 4.0);
        let cov = shape_correlation(&y, 6.0).unwrap();
        let x = GrayMap::from_fn(21, 21, |r, c| if (r, c) == (9, 11) { 1.0 } else { 0.0 }).unwrap();
        let r = reverse_exact(&x, &y, &cov).unwrap();
        for row in 0..21 {
            for col in 0..21 {
                let expect = if y.get(row, col) { cov.density(9.0 - row as f64, 11.0 - col as f64) } else { 0.0 };
                assert!((r.get(row, col) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn reverse_saturates_at_unit_mass() {
        // A kernel whose mass is exactly one, applied to an all-ones map.
        let y = BinaryMask::from_fn(61, 21, |r, c| r == 10 && (26..35).contains(&c)).unwrap();
        let k = kernel_for(&y, 6.0).unwrap();
        assert!((k.sum() - 1.0).abs() < 1e-12);
        let x = GrayMap::constant(61, 21, 1.0).unwrap();
        let r = reverse_deduction(&x, &y, &k).unwrap();
        let v = r.get(10, 30);
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn harmonic_endpoints() {
        assert_eq!(harmonic(1.0, 0.0, 0.0), 0.0);
        assert_eq!(harmonic(1.0, 0.0, 0.7), 0.0);
        assert!((harmonic(1.0, 0.5, 0.5) - 0.5).abs() < 1e-15);
        assert!((harmonic(1.2, 1.0, 1.0) - 1.0).abs() < 1e-15);
    }
}
