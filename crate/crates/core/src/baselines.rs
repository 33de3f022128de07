//! Comparator metrics: MAE, IoU, F-beta, weighted F-beta, S-measure and
//! E-measure.
//!
//! IoU, F-beta and E-measure take binary predictions; [`crate::metrics`]
//! binarizes gray maps adaptively before calling them.

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, fabs, log, sqrt};

use crate::morphology::nearest_feature;
use crate::raster::{ensure_same_dims, BinaryMask, GrayMap};
use crate::{Error, Result};

/// Denominator stabilizer for ratios that can vanish.
const STAB: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineParams {
    /// `beta^2` of the F-measure.
    pub beta_sq_f: f64,
    /// `beta` of the weighted F-measure.
    pub beta_w: f64,
    /// Object/region mix of the S-measure.
    pub alpha_s: f64,
    /// Coefficient on the standard deviation in the S-measure object term
    /// (`2 * lambda_obj * sigma`).
    pub lambda_obj: f64,
    /// Sigma of the weighted F-measure dependency Gaussian.
    pub dep_sigma: f64,
    /// Side of the dependency Gaussian window.
    pub dep_window: usize,
    /// Decay rate of background importance with distance to the object.
    pub imp_alpha: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            beta_sq_f: 0.3,
            beta_w: 1.0,
            alpha_s: 0.5,
            lambda_obj: 0.5,
            dep_sigma: 5.0,
            dep_window: 7,
            imp_alpha: log(0.5) / 5.0,
        }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_sq_f > 0.0) || !(self.beta_w > 0.0) || !(self.dep_sigma > 0.0) || !(self.lambda_obj >= 0.0) {
            return Err(Error::InvalidParameter("baseline weights must be positive"));
        }
        if !(0.0..=1.0).contains(&self.alpha_s) {
            return Err(Error::InvalidParameter("alpha_s must lie in [0, 1]"));
        }
        if self.dep_window == 0 || self.dep_window.is_multiple_of(2) {
            return Err(Error::InvalidParameter("dependency window must be odd"));
        }
        Ok(())
    }
}

/// Mean absolute error `mean |Y - X|`.
pub fn mae(x: &GrayMap, y: &BinaryMask) -> Result<f64> {
    ensure_same_dims(x.dims(), y.dims())?;
    let total: f64 = x
        .values()
        .iter()
        .zip(y.values())
        .map(|(&xv, &yv)| fabs(if yv { 1.0 } else { 0.0 } - xv))
        .sum();
    Ok(total / x.values().len() as f64)
}

/// Pixel confusion counts of a binary prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn of(x: &BinaryMask, y: &BinaryMask) -> Result<Self> {
        ensure_same_dims(x.dims(), y.dims())?;
        let mut c = Confusion::default();
        for (&xv, &yv) in x.values().iter().zip(y.values()) {
            match (xv, yv) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }
}

/// `|X and Y| / |X or Y|`.
pub fn iou(x: &BinaryMask, y: &BinaryMask) -> Result<f64> {
    let c = Confusion::of(x, y)?;
    let union = c.tp + c.fp + c.fn_;
    if union == 0 {
        return Err(Error::BothEmpty);
    }
    Ok(c.tp as f64 / union as f64)
}

/// F-measure from confusion counts; zero when there is no true positive.
pub fn f_beta_counts(c: &Confusion, beta_sq: f64) -> f64 {
    if c.tp == 0 {
        return 0.0;
    }
    let precision = c.tp as f64 / (c.tp + c.fp) as f64;
    let recall = c.tp as f64 / (c.tp + c.fn_) as f64;
    (1.0 + beta_sq) * precision * recall / (beta_sq * precision + recall)
}

pub fn f_beta(x: &BinaryMask, y: &BinaryMask, beta_sq: f64) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    Ok(f_beta_counts(&Confusion::of(x, y)?, beta_sq))
}

fn gaussian_window(side: usize, sigma: f64) -> Vec<f64> {
    let half = (side / 2) as isize;
    let mut w = Vec::with_capacity(side * side);
    for dr in -half..=half {
        for dc in -half..=half {
            w.push(exp(-((dr * dr + dc * dc) as f64) / (2.0 * sigma * sigma)));
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

fn filter_zero_padded(values: &[f64], h: usize, w: usize, window: &[f64], side: usize) -> Vec<f64> {
    let half = (side / 2) as isize;
    let mut out = vec![0.0; h * w];
    for r in 0..h as isize {
        for c in 0..w as isize {
            let mut acc = 0.0;
            for dr in -half..=half {
                let rr = r + dr;
                if rr < 0 || rr >= h as isize {
                    continue;
                }
                for dc in -half..=half {
                    let cc = c + dc;
                    if cc < 0 || cc >= w as isize {
                        continue;
                    }
                    acc += window[((dr + half) as usize) * side + (dc + half) as usize] * values[(rr as usize) * w + cc as usize];
                }
            }
            out[(r as usize) * w + c as usize] = acc;
        }
    }
    out
}

/// Weighted F-measure.
///
/// Background errors inherit the error of their nearest foreground pixel
/// before Gaussian smoothing (the dependency term); foreground errors are
/// replaced by the smoothed error where it is smaller; background errors
/// are amplified by `2 - exp(imp_alpha * distance)` (the importance term).
pub fn f_beta_w(x: &GrayMap, y: &BinaryMask, params: &BaselineParams) -> Result<f64> {
    ensure_same_dims(x.dims(), y.dims())?;
    params.validate()?;
    if y.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let (h, w) = y.dims();
    let gt = y.values();
    let err: Vec<f64> = x
        .values()
        .iter()
        .zip(gt)
        .map(|(&xv, &yv)| fabs(if yv { 1.0 } else { 0.0 } - xv))
        .collect();
    let nearest = nearest_feature(gt, h, w);

    let mut spread = err.clone();
    for i in 0..h * w {
        if !gt[i] {
            let (src, _) = nearest[i].expect("ground truth is non-empty");
            spread[i] = err[src];
        }
    }
    let window = gaussian_window(params.dep_window, params.dep_sigma);
    let smoothed = filter_zero_padded(&spread, h, w, &window, params.dep_window);

    let (mut fg_err, mut bg_err) = (0.0, 0.0);
    let fg_count = y.count() as f64;
    for i in 0..h * w {
        if gt[i] {
            fg_err += if smoothed[i] < err[i] { smoothed[i] } else { err[i] };
        } else {
            let (_, d2) = nearest[i].expect("ground truth is non-empty");
            let importance = 2.0 - exp(params.imp_alpha * sqrt(d2 as f64));
            bg_err += err[i] * importance;
        }
    }
    let tp = fg_count - fg_err;
    let recall = 1.0 - fg_err / fg_count;
    let precision = tp / (f64::EPSILON + tp + bg_err);
    let b2 = params.beta_w * params.beta_w;
    let q = (1.0 + b2) * recall * precision / (f64::EPSILON + recall + b2 * precision);
    Ok(q.clamp(0.0, 1.0))
}

#[derive(Default)]
struct Moments {
    n: f64,
    sx: f64,
    sy: f64,
}

// Weighted SSIM-style similarity of one region.
fn region_ssim(xs: &[f64], ys: &[f64], ws: &[f64]) -> f64 {
    let mut m = Moments::default();
    for ((&x, &y), &w) in xs.iter().zip(ys).zip(ws) {
        m.n += w;
        m.sx += w * x;
        m.sy += w * y;
    }
    if m.n <= 0.0 {
        return 0.0;
    }
    let (mx, my) = (m.sx / m.n, m.sy / m.n);
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for ((&x, &y), &w) in xs.iter().zip(ys).zip(ws) {
        vx += w * (x - mx) * (x - mx);
        vy += w * (y - my) * (y - my);
        cxy += w * (x - mx) * (y - my);
    }
    let dof = m.n - 1.0;
    if dof > 0.0 {
        vx /= dof;
        vy /= dof;
        cxy /= dof;
    } else {
        (vx, vy, cxy) = (0.0, 0.0, 0.0);
    }
    let num = 4.0 * mx * my * cxy;
    let den = (mx * mx + my * my) * (vx + vy);
    if num != 0.0 {
        num / (den + STAB)
    } else if den == 0.0 {
        1.0
    } else {
        0.0
    }
}

fn object_similarity(values: &[f64], lambda_obj: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
    } else {
        0.0
    };
    2.0 * mean / (mean * mean + 1.0 + 2.0 * lambda_obj * sd + STAB)
}

/// Fractional membership of a line index in the lower half of a split at
/// `sum / count`: 1 below, 1/2 on, 0 above. Evaluated in integers.
fn lower_share(index: usize, sum: u128, count: u128) -> f64 {
    let scaled = index as u128 * count;
    match scaled.cmp(&sum) {
        core::cmp::Ordering::Less => 1.0,
        core::cmp::Ordering::Equal => 0.5,
        core::cmp::Ordering::Greater => 0.0,
    }
}

/// S-measure: `alpha * S_object + (1 - alpha) * S_region`.
///
/// The region term splits the frame into quadrants at the ground-truth
/// centroid and weights each quadrant by its share of the foreground. A
/// pixel row or column that passes exactly through the centroid is shared
/// equally between the two sides, which keeps the score invariant under
/// mirroring.
pub fn s_measure(x: &GrayMap, y: &BinaryMask, params: &BaselineParams) -> Result<f64> {
    ensure_same_dims(x.dims(), y.dims())?;
    params.validate()?;
    let (h, w) = y.dims();
    let y_mean = y.mean();
    if y.is_empty() {
        return Ok((1.0 - x.mean()).clamp(0.0, 1.0));
    }
    if y.count() == h * w {
        return Ok(x.mean().clamp(0.0, 1.0));
    }

    let mut fg = Vec::new();
    let mut bg = Vec::new();
    for (&xv, &yv) in x.values().iter().zip(y.values()) {
        if yv {
            fg.push(xv);
        } else {
            bg.push(1.0 - xv);
        }
    }
    let s_object =
        y_mean * object_similarity(&fg, params.lambda_obj) + (1.0 - y_mean) * object_similarity(&bg, params.lambda_obj);

    let (mut row_sum, mut col_sum) = (0u128, 0u128);
    for p in y.foreground_pixels() {
        row_sum += p.row as u128;
        col_sum += p.col as u128;
    }
    let count = y.count() as u128;
    let top: Vec<f64> = (0..h).map(|r| lower_share(r, row_sum, count)).collect();
    let left: Vec<f64> = (0..w).map(|c| lower_share(c, col_sum, count)).collect();

    let ys: Vec<f64> = y.values().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mut s_region = 0.0;
    for (vert_top, horiz_left) in [(true, true), (true, false), (false, true), (false, false)] {
        let mut weights = vec![0.0; h * w];
        let mut fg_share = 0.0;
        for r in 0..h {
            let wr = if vert_top { top[r] } else { 1.0 - top[r] };
            if wr == 0.0 {
                continue;
            }
            for c in 0..w {
                let wc = if horiz_left { left[c] } else { 1.0 - left[c] };
                let wgt = wr * wc;
                weights[r * w + c] = wgt;
                fg_share += wgt * ys[r * w + c];
            }
        }
        if fg_share == 0.0 {
            continue;
        }
        s_region += fg_share / count as f64 * region_ssim(x.values(), &ys, &weights);
    }

    let score = params.alpha_s * s_object + (1.0 - params.alpha_s) * s_region;
    Ok(score.clamp(0.0, 1.0))
}

/// E-measure of a binary prediction.
///
/// A constant ground truth falls back to the fraction of agreeing pixels.
pub fn e_measure(x: &BinaryMask, y: &BinaryMask) -> Result<f64> {
    ensure_same_dims(x.dims(), y.dims())?;
    let n = x.values().len();
    if y.is_empty() {
        return Ok(x.values().iter().filter(|&&b| !b).count() as f64 / n as f64);
    }
    if y.count() == n {
        return Ok(x.count() as f64 / n as f64);
    }
    let (mx, my) = (x.mean(), y.mean());
    let mut total = 0.0;
    for (&xv, &yv) in x.values().iter().zip(y.values()) {
        let px = if xv { 1.0 } else { 0.0 } - mx;
        let py = if yv { 1.0 } else { 0.0 } - my;
        let xi = 2.0 * px * py / (px * px + py * py + STAB);
        total += (1.0 + xi) * (1.0 + xi);
    }
    Ok((total / (4.0 * n as f64)).clamp(0.0, 1.0))
}
