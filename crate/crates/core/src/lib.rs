//! Context-aware evaluation of foreground maps.
//!
//! This crate holds the numerical core of the toolkit and is `no_std`
//! (it needs `alloc`). It provides:
//!
//! - [`raster`]: gray maps, binary masks, RGB images, adaptive binarization.
//! - [`morphology`]: square-element erosion/dilation and Euclidean
//!   nearest-feature transforms.
//! - [`colorimetry`]: sRGB to CIELAB and the CIEDE2000 color difference.
//! - [`correlation`]: shape covariance, trace normalization and the
//!   discretized Gaussian pixel-correlation kernel.
//! - [`cmeasure`]: forward inference, reverse deduction and the generic and
//!   camouflage-weighted Context-measure.
//! - [`camo`]: pixel-level camouflage degree via contextual overpainting.
//! - [`baselines`]: MAE, IoU, F-beta, weighted F-beta, S-measure, E-measure.
//! - [`metrics`]: a uniform front-end over every metric.
//! - [`metastudy`]: the four meta-measure protocols that score metrics.
//!
//! File IO, the batch runner and the CLI live in the `ctxmeasure` crate.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod camo;
pub mod cmeasure;
pub mod colorimetry;
pub mod correlation;
mod error;
pub mod metastudy;
pub mod metrics;
pub mod morphology;
pub mod raster;

pub use error::{Error, Result};
pub use metrics::{Metric, MetricSuite};
pub use raster::{BinaryMask, GrayMap, PixelCoord, RgbImage};
