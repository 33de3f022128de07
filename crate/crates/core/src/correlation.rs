//! Probabilistic pixel correlation conditioned on a ground-truth shape.
//!
//! The ground-truth foreground coordinates give a 2x2 covariance, which is
//! rescaled to trace `alpha^2` and used as the covariance of a bivariate
//! Gaussian over pixel offsets. The density is discretized into a square
//! kernel covering three standard deviations of the major axis.
//!
//! Coordinates are `(row, col)` throughout.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{ceil, exp, sqrt};

use crate::raster::{BinaryMask, Field, GrayMap, PixelCoord};
use crate::{Error, Result};

/// Ridge added to the sample covariance.
pub const COVARIANCE_RIDGE: f64 = 1e-6;

pub type Mat2 = [[f64; 2]; 2];

fn trace(m: &Mat2) -> f64 {
    m[0][0] + m[1][1]
}

fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Eigenvalues of a symmetric 2x2 matrix, largest first.
pub fn eigenvalues(m: &Mat2) -> (f64, f64) {
    let half_tr = 0.5 * trace(m);
    let d = 0.5 * (m[0][0] - m[1][1]);
    let disc = sqrt(d * d + m[0][1] * m[0][1]);
    (half_tr + disc, half_tr - disc)
}

/// Covariance of the ground-truth foreground coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeCovariance {
    pub sigma: Mat2,
    /// Centroid as `(row, col)`.
    pub mean: (f64, f64),
}

/// Sample covariance (Bessel-corrected) of the coordinates plus a
/// [`COVARIANCE_RIDGE`] on the diagonal.
pub fn estimate_covariance(fg: &[PixelCoord]) -> Result<ShapeCovariance> {
    if fg.is_empty() {
        return Err(Error::EmptyForeground);
    }
    let n = fg.len() as f64;
    let (mut sr, mut sc) = (0.0, 0.0);
    for p in fg {
        sr += p.row as f64;
        sc += p.col as f64;
    }
    let (mr, mc) = (sr / n, sc / n);
    let (mut vrr, mut vrc, mut vcc) = (0.0, 0.0, 0.0);
    for p in fg {
        let dr = p.row as f64 - mr;
        let dc = p.col as f64 - mc;
        vrr += dr * dr;
        vrc += dr * dc;
        vcc += dc * dc;
    }
    let denom = (n - 1.0).max(1.0);
    let sigma = [
        [vrr / denom + COVARIANCE_RIDGE, vrc / denom],
        [vrc / denom, vcc / denom + COVARIANCE_RIDGE],
    ];
    Ok(ShapeCovariance { sigma, mean: (mr, mc) })
}

/// Covariance rescaled to trace `alpha^2`, with its inverse and determinant
/// cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedCovariance {
    pub sigma_hat: Mat2,
    pub alpha: f64,
    inverse: Mat2,
    determinant: f64,
}

impl NormalizedCovariance {
    /// Builds from an explicit symmetric positive-definite matrix.
    pub fn from_matrix(sigma_hat: Mat2, alpha: f64) -> Result<Self> {
        let determinant = det(&sigma_hat);
        if !(determinant > 0.0) || !(sigma_hat[0][0] > 0.0) || sigma_hat[0][1] != sigma_hat[1][0] {
            return Err(Error::DegenerateCovariance);
        }
        let inverse = [
            [sigma_hat[1][1] / determinant, -sigma_hat[0][1] / determinant],
            [-sigma_hat[1][0] / determinant, sigma_hat[0][0] / determinant],
        ];
        Ok(Self { sigma_hat, alpha, inverse, determinant })
    }

    pub fn inverse(&self) -> Mat2 {
        self.inverse
    }

    pub fn determinant(&self) -> f64 {
        self.determinant
    }

    /// Gaussian density at the offset `(d_row, d_col)`.
    pub fn density(&self, d_row: f64, d_col: f64) -> f64 {
        let q = self.mahalanobis_sq(d_row, d_col);
        exp(-0.5 * q) / (2.0 * PI * sqrt(self.determinant))
    }

    pub fn mahalanobis_sq(&self, d_row: f64, d_col: f64) -> f64 {
        let inv = &self.inverse;
        d_row * (inv[0][0] * d_row + inv[0][1] * d_col) + d_col * (inv[1][0] * d_row + inv[1][1] * d_col)
    }

    pub fn peak(&self) -> f64 {
        1.0 / (2.0 * PI * sqrt(self.determinant))
    }
}

/// Rescales `cov` so its trace equals `alpha^2`.
pub fn normalize_covariance(cov: &ShapeCovariance, alpha: f64) -> Result<NormalizedCovariance> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter("alpha must be positive"));
    }
    let tr = trace(&cov.sigma);
    if !(tr > 0.0) {
        return Err(Error::DegenerateCovariance);
    }
    let s = alpha * alpha / tr;
    let m = cov.sigma;
    let sigma_hat = [[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]];
    NormalizedCovariance::from_matrix(sigma_hat, alpha)
}

/// Convenience: covariance of `y`'s foreground normalized with `alpha`.
pub fn shape_correlation(y: &BinaryMask, alpha: f64) -> Result<NormalizedCovariance> {
    let fg = y.foreground_pixels();
    let cov = estimate_covariance(&fg)?;
    normalize_covariance(&cov, alpha)
}

/// Correlation between pixels `m` and `n` under `cov`.
pub fn pixel_correlation(m: PixelCoord, n: PixelCoord, cov: &NormalizedCovariance) -> f64 {
    let dr = n.row as f64 - m.row as f64;
    let dc = n.col as f64 - m.col as f64;
    cov.density(dr, dc)
}

/// Discretized correlation density on a `(2 * half + 1)^2` grid of offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    pub half_rows: usize,
    pub half_cols: usize,
    weights: Vec<f64>,
    source: NormalizedCovariance,
    raw_sum: f64,
}

impl GaussianKernel {
    pub fn rows(&self) -> usize {
        2 * self.half_rows + 1
    }

    pub fn cols(&self) -> usize {
        2 * self.half_cols + 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at offset `(d_row, d_col)`; zero outside the support.
    pub fn weight(&self, d_row: isize, d_col: isize) -> f64 {
        let (hr, hc) = (self.half_rows as isize, self.half_cols as isize);
        if d_row.abs() > hr || d_col.abs() > hc {
            return 0.0;
        }
        self.weights[((d_row + hr) as usize) * self.cols() + (d_col + hc) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Sum of the density samples before any downward rescaling.
    pub fn raw_sum(&self) -> f64 {
        self.raw_sum
    }

    pub fn source(&self) -> &NormalizedCovariance {
        &self.source
    }
}

/// Half extent `ceil(3 * sqrt(lambda_max))`, shared by both axes.
pub fn kernel_half_extent(cov: &NormalizedCovariance) -> usize {
    let (lmax, _) = eigenvalues(&cov.sigma_hat);
    ceil(3.0 * sqrt(lmax.max(0.0))) as usize
}

/// Samples the density at every integer offset within the 3-sigma box.
///
/// `frame` is the `(height, width)` of the images the kernel will be applied
/// to; a half extent beyond twice the larger dimension is rejected. If the
/// samples sum above one they are scaled down to sum exactly to one.
pub fn build_kernel(cov: &NormalizedCovariance, frame: (usize, usize)) -> Result<GaussianKernel> {
    let half = kernel_half_extent(cov);
    let limit = 2 * frame.0.max(frame.1);
    if half > limit {
        return Err(Error::KernelTooLarge { half, limit });
    }
    let size = 2 * half + 1;
    let mut weights = vec![0.0; size * size];
    let h = half as isize;
    for dr in -h..=h {
        for dc in -h..=h {
            weights[((dr + h) as usize) * size + (dc + h) as usize] = cov.density(dr as f64, dc as f64);
        }
    }
    let raw_sum: f64 = weights.iter().sum();
    if raw_sum > 1.0 {
        for w in &mut weights {
            *w /= raw_sum;
        }
    }
    Ok(GaussianKernel { half_rows: half, half_cols: half, weights, source: *cov, raw_sum })
}

/// Zero-padded correlation of `values` (row-major, `height x width`) with
/// the kernel. The kernel is symmetric, so this is also the convolution.
pub fn convolve_values(values: &[f64], height: usize, width: usize, kernel: &GaussianKernel) -> Field {
    assert_eq!(values.len(), height * width);
    let mut out = Field::zeros(width, height);
    let (hr, hc) = (kernel.half_rows as isize, kernel.half_cols as isize);
    let kcols = kernel.cols();
    let w = width as isize;
    // nonzero column span of each source row; zero rows are skipped
    let spans: Vec<Option<(isize, isize)>> = values
        .chunks(width.max(1))
        .map(|row| {
            let first = row.iter().position(|&v| v != 0.0)?;
            let last = row.iter().rposition(|&v| v != 0.0)?;
            Some((first as isize, last as isize + 1))
        })
        .collect();
    let dst = out.values_mut();
    for r in 0..height as isize {
        let out_row = &mut dst[(r * w) as usize..((r + 1) * w) as usize];
        for dr in -hr..=hr {
            let sr = r + dr;
            if sr < 0 || sr >= height as isize {
                continue;
            }
            let Some((lo, hi)) = spans[sr as usize] else { continue };
            let src_row = &values[(sr * w) as usize..((sr + 1) * w) as usize];
            let krow = &kernel.weights[((dr + hr) as usize) * kcols..((dr + hr) as usize + 1) * kcols];
            for dc in -hc..=hc {
                let kw = krow[(dc + hc) as usize];
                // output columns c with 0 <= c + dc < width
                let c0 = (lo - dc).max(0);
                let c1 = (hi - dc).min(w);
                if c0 >= c1 {
                    continue;
                }
                let src = &src_row[(c0 + dc) as usize..(c1 + dc) as usize];
                for (o, s) in out_row[c0 as usize..c1 as usize].iter_mut().zip(src) {
                    *o += kw * s;
                }
            }
        }
    }
    out
}

pub fn convolve(map: &GrayMap, kernel: &GaussianKernel) -> Field {
    convolve_values(map.values(), map.height(), map.width(), kernel)
}

pub fn convolve_mask(mask: &BinaryMask, kernel: &GaussianKernel) -> Field {
    let values: Vec<f64> = mask.values().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    convolve_values(&values, mask.height(), mask.width(), kernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(list: &[(usize, usize)]) -> Vec<PixelCoord> {
        list.iter().map(|&(r, c)| PixelCoord::new(r, c)).collect()
    }

    #[test]
    fn empty_foreground_is_an_error() {
        assert_eq!(estimate_covariance(&[]), Err(Error::EmptyForeground));
    }

    #[test]
    fn single_pixel_falls_back_to_ridge() {
        let c = estimate_covariance(&coords(&[(4, 9)])).unwrap();
        assert_eq!(c.sigma, [[COVARIANCE_RIDGE, 0.0], [0.0, COVARIANCE_RIDGE]]);
        let n = normalize_covariance(&c, 6.0).unwrap();
        assert!((n.sigma_hat[0][0] - 18.0).abs() < 1e-9);
    }

    #[test]
    fn horizontal_line_covariance() {
        let fg: Vec<_> = (0..9).map(|c| PixelCoord::new(5, c)).collect();
        let cov = estimate_covariance(&fg).unwrap();
        assert!((cov.sigma[1][1] - (7.5 + COVARIANCE_RIDGE)).abs() < 1e-12);
        assert!((cov.sigma[0][0] - COVARIANCE_RIDGE).abs() < 1e-15);
        assert_eq!(cov.sigma[0][1], 0.0);
    }

    #[test]
    fn centered_disk_is_isotropic() {
        let mut fg = Vec::new();
        for r in 0..41usize {
            for c in 0..41usize {
                let (dr, dc) = (r as f64 - 20.0, c as f64 - 20.0);
                if dr * dr + dc * dc <= 144.0 {
                    fg.push(PixelCoord::new(r, c));
                }
            }
        }
        let cov = estimate_covariance(&fg).unwrap();
        assert!(cov.sigma[0][1].abs() < 1e-9);
        assert!((cov.sigma[0][0] - cov.sigma[1][1]).abs() < 1e-9);
    }

    #[test]
    fn normalization_examples() {
        let id = ShapeCovariance { sigma: [[1.0, 0.0], [0.0, 1.0]], mean: (0.0, 0.0) };
        let n = normalize_covariance(&id, 6.0).unwrap();
        assert_eq!(n.sigma_hat, [[18.0, 0.0], [0.0, 18.0]]);
        let d = ShapeCovariance { sigma: [[3.0, 0.0], [0.0, 1.0]], mean: (0.0, 0.0) };
        let n = normalize_covariance(&d, 6.0).unwrap();
        assert_eq!(n.sigma_hat, [[27.0, 0.0], [0.0, 9.0]]);
        let z = ShapeCovariance { sigma: [[0.0, 0.0], [0.0, 0.0]], mean: (0.0, 0.0) };
        assert_eq!(normalize_covariance(&z, 6.0), Err(Error::DegenerateCovariance));
    }

    #[test]
    fn density_examples() {
        let cov = NormalizedCovariance::from_matrix([[18.0, 0.0], [0.0, 18.0]], 6.0).unwrap();
        let peak = pixel_correlation(PixelCoord::new(3, 3), PixelCoord::new(3, 3), &cov);
        assert!((peak - 1.0 / (2.0 * PI * 18.0)).abs() < 1e-15);
        assert!((peak - 0.008842).abs() < 1e-6);
        // three standard deviations along the row axis
        let three_sigma = 3.0 * 18f64.sqrt();
        let v = cov.density(three_sigma, 0.0);
        assert!((v - peak * (-4.5f64).exp()).abs() < 1e-15);
        let a = pixel_correlation(PixelCoord::new(1, 2), PixelCoord::new(7, 4), &cov);
        let b = pixel_correlation(PixelCoord::new(7, 4), PixelCoord::new(1, 2), &cov);
        assert_eq!(a, b);
    }

    #[test]
    fn isotropic_kernel_extent_and_mass() {
        let cov = NormalizedCovariance::from_matrix([[18.0, 0.0], [0.0, 18.0]], 6.0).unwrap();
        let k = build_kernel(&cov, (64, 64)).unwrap();
        assert_eq!(k.half_rows, 13);
        assert_eq!((k.rows(), k.cols()), (27, 27));
        // independent summation of the density over the box
        let mut oracle = 0.0;
        for dr in -13i32..=13 {
            for dc in -13i32..=13 {
                let q = f64::from(dr * dr + dc * dc) / 18.0;
                oracle += (-0.5 * q).exp() / (2.0 * PI * 18.0);
            }
        }
        assert!((k.sum() - oracle).abs() < 1e-12);
        assert!(k.sum() >= 0.99 && k.sum() <= 1.0, "{}", k.sum());
        for dr in -13isize..=13 {
            for dc in -13isize..=13 {
                assert_eq!(k.weight(dr, dc), k.weight(dc, -dr));
                assert_eq!(k.weight(dr, dc), k.weight(-dr, -dc));
            }
        }
    }

    #[test]
    fn kernel_monotone_along_rays() {
        let cov = NormalizedCovariance::from_matrix([[27.0, 0.0], [0.0, 9.0]], 6.0).unwrap();
        let k = build_kernel(&cov, (64, 64)).unwrap();
        let h = k.half_rows as isize;
        for (sr, sc) in [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1)] {
            let mut prev = f64::INFINITY;
            let mut t: isize = 0;
            while (t * sr).abs() <= h && (t * sc).abs() <= h {
                let w = k.weight(t * sr, t * sc);
                assert!(w <= prev);
                prev = w;
                t += 1;
            }
        }
    }

    #[test]
    fn thin_shape_kernel_is_rescaled() {
        let fg: Vec<_> = (0..9).map(|c| PixelCoord::new(5, c)).collect();
        let cov = normalize_covariance(&estimate_covariance(&fg).unwrap(), 6.0).unwrap();
        let k = build_kernel(&cov, (16, 16)).unwrap();
        assert!(k.raw_sum() > 1.0);
        assert!((k.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oversized_kernel_is_rejected() {
        let cov = NormalizedCovariance::from_matrix([[18.0, 0.0], [0.0, 18.0]], 6.0).unwrap();
        assert!(matches!(build_kernel(&cov, (3, 3)), Err(Error::KernelTooLarge { .. })));
    }

    #[test]
    fn impulse_response_is_the_kernel() {
        let cov = NormalizedCovariance::from_matrix([[18.0, 0.0], [0.0, 18.0]], 6.0).unwrap();
        let k = build_kernel(&cov, (41, 41)).unwrap();
        let x = GrayMap::from_fn(41, 41, |r, c| if (r, c) == (20, 20) { 1.0 } else { 0.0 }).unwrap();
        let out = convolve(&x, &k);
        for r in 0..41 {
            for c in 0..41 {
                let expect = k.weight(r as isize - 20, c as isize - 20);
                assert_eq!(out.get(r, c), expect);
            }
        }
        let zero = convolve(&GrayMap::constant(9, 7, 0.0).unwrap(), &k);
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }
}
