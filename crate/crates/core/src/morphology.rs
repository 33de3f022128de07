//! Binary morphology with a full square structuring element, and an exact
//! Euclidean nearest-feature transform.
//!
//! Everything outside the frame is background.

use alloc::vec;
use alloc::vec::Vec;

use crate::raster::BinaryMask;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MorphOp {
    Erode,
    Dilate,
}

/// Erodes or dilates `y` with the `(2 * radius + 1)^2` square.
pub fn morph(y: &BinaryMask, op: MorphOp, radius: usize) -> Result<BinaryMask> {
    if radius == 0 {
        return Err(Error::InvalidParameter("morphology radius must be at least 1"));
    }
    Ok(match op {
        MorphOp::Erode => erode(y, radius),
        MorphOp::Dilate => dilate(y, radius),
    })
}

pub fn dilate(y: &BinaryMask, radius: usize) -> BinaryMask {
    let (h, w) = y.dims();
    let rows = pass(y.values(), h, w, radius, Axis::Row, Rule::Any);
    let out = pass(&rows, h, w, radius, Axis::Col, Rule::Any);
    BinaryMask::new(w, h, out).expect("dims preserved")
}

pub fn erode(y: &BinaryMask, radius: usize) -> BinaryMask {
    let (h, w) = y.dims();
    let rows = pass(y.values(), h, w, radius, Axis::Row, Rule::All);
    let out = pass(&rows, h, w, radius, Axis::Col, Rule::All);
    BinaryMask::new(w, h, out).expect("dims preserved")
}

#[derive(Clone, Copy)]
enum Axis {
    Row,
    Col,
}

#[derive(Clone, Copy)]
enum Rule {
    Any,
    All,
}

// One 1-D pass of the separable square window, using a prefix count per line.
fn pass(src: &[bool], h: usize, w: usize, radius: usize, axis: Axis, rule: Rule) -> Vec<bool> {
    let (lines, len) = match axis {
        Axis::Row => (h, w),
        Axis::Col => (w, h),
    };
    let at = |line: usize, i: usize| match axis {
        Axis::Row => line * w + i,
        Axis::Col => i * w + line,
    };
    let mut out = vec![false; h * w];
    let mut prefix = vec![0usize; len + 1];
    for line in 0..lines {
        for i in 0..len {
            prefix[i + 1] = prefix[i] + usize::from(src[at(line, i)]);
        }
        for i in 0..len {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(len - 1);
            let set = prefix[hi + 1] - prefix[lo];
            out[at(line, i)] = match rule {
                Rule::Any => set > 0,
                // window cells outside the frame count as background
                Rule::All => set == 2 * radius + 1,
            };
        }
    }
    out
}

/// For every pixel, the nearest feature pixel (`true` in `features`) under
/// Euclidean distance, as `(row-major index, squared distance)`.
///
/// Returns `None` everywhere when there is no feature pixel.
pub fn nearest_feature(features: &[bool], height: usize, width: usize) -> Vec<Option<(usize, u64)>> {
    assert_eq!(features.len(), height * width);
    const NONE: usize = usize::MAX;

    // Vertical pass: nearest feature row within each column.
    let mut col_row = vec![NONE; height * width];
    for c in 0..width {
        let mut last = NONE;
        for r in 0..height {
            if features[r * width + c] {
                last = r;
            }
            col_row[r * width + c] = last;
        }
        let mut next = NONE;
        for r in (0..height).rev() {
            if features[r * width + c] {
                next = r;
            }
            let up = col_row[r * width + c];
            let pick = match (up, next) {
                (NONE, n) => n,
                (u, NONE) => u,
                (u, n) => {
                    if r - u <= n - r {
                        u
                    } else {
                        n
                    }
                }
            };
            col_row[r * width + c] = pick;
        }
    }

    // Horizontal pass: lower envelope of parabolas (c - q)^2 + g(q)^2.
    let mut out = vec![None; height * width];
    let mut v = vec![0usize; width];
    let mut z = vec![0f64; width + 1];
    let mut f = vec![0f64; width];
    for r in 0..height {
        let mut k: isize = -1;
        for q in 0..width {
            let fr = col_row[r * width + q];
            if fr == NONE {
                continue;
            }
            let dy = fr.abs_diff(r) as f64;
            f[q] = dy * dy;
            let qf = q as f64;
            loop {
                if k < 0 {
                    k = 0;
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                let p = v[k as usize];
                let pf = p as f64;
                let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf);
                if s <= z[k as usize] {
                    k -= 1;
                    continue;
                }
                k += 1;
                v[k as usize] = q;
                z[k as usize] = s;
                z[k as usize + 1] = f64::INFINITY;
                break;
            }
        }
        if k < 0 {
            continue;
        }
        let mut j = 0usize;
        for c in 0..width {
            while z[j + 1] < c as f64 {
                j += 1;
            }
            let q = v[j];
            let fr = col_row[r * width + q];
            let dx = c.abs_diff(q) as u64;
            let dy = fr.abs_diff(r) as u64;
            out[r * width + c] = Some((fr * width + q, dx * dx + dy * dy));
        }
    }
    out
}
