//! One entry point for every metric, so batch runners and meta-studies can
//! treat them alike.

use core::fmt;
use core::str::FromStr;

use crate::baselines::{self, BaselineParams};
use crate::camo::{quantify, CamoMap, CamoParams};
use crate::cmeasure::{context_measure, context_measure_camo, CmParams};
use crate::raster::{binarize_adaptive, BinaryMask, GrayMap, RgbImage};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Mae,
    Iou,
    FBeta,
    WeightedFBeta,
    SMeasure,
    EMeasure,
    CMeasure,
    CMeasureCamo,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Mae,
        Metric::Iou,
        Metric::FBeta,
        Metric::WeightedFBeta,
        Metric::SMeasure,
        Metric::EMeasure,
        Metric::CMeasure,
        Metric::CMeasureCamo,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Metric::Mae => "mae",
            Metric::Iou => "iou",
            Metric::FBeta => "fbeta",
            Metric::WeightedFBeta => "wfbeta",
            Metric::SMeasure => "smeasure",
            Metric::EMeasure => "emeasure",
            Metric::CMeasure => "cmeasure",
            Metric::CMeasureCamo => "cmeasure-camo",
        }
    }

    /// MAE is an error; every other metric is a similarity.
    pub const fn higher_is_better(self) -> bool {
        !matches!(self, Metric::Mae)
    }

    pub const fn needs_image(self) -> bool {
        matches!(self, Metric::CMeasureCamo)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidParameter("unknown metric name"))
    }
}

/// Parameters for every metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSuite {
    pub cm: CmParams,
    pub cm_camo: CmParams,
    pub camo: CamoParams,
    pub baseline: BaselineParams,
}

impl Default for MetricSuite {
    fn default() -> Self {
        Self {
            cm: CmParams::generic(),
            cm_camo: CmParams::camouflaged(),
            camo: CamoParams::default(),
            baseline: BaselineParams::default(),
        }
    }
}

impl MetricSuite {
    pub fn validate(&self) -> Result<()> {
        self.cm.validate()?;
        self.cm_camo.validate()?;
        self.camo.validate()?;
        self.baseline.validate()
    }

    /// Raw metric value. The camouflage-weighted measure derives its
    /// camouflage map from `image`.
    pub fn score(&self, metric: Metric, x: &GrayMap, y: &BinaryMask, image: Option<&RgbImage>) -> Result<f64> {
        if metric == Metric::CMeasureCamo {
            let img = image.ok_or(Error::MissingImage)?;
            let d = quantify(img, y, &self.camo)?;
            return context_measure_camo(x, y, &d, &self.cm_camo);
        }
        self.score_with_map(metric, x, y, None)
    }

    /// Like [`score`](Self::score) but with a precomputed camouflage map.
    pub fn score_with_map(&self, metric: Metric, x: &GrayMap, y: &BinaryMask, d: Option<&CamoMap>) -> Result<f64> {
        let b = &self.baseline;
        match metric {
            Metric::Mae => baselines::mae(x, y),
            Metric::Iou => baselines::iou(&binarize_adaptive(x), y),
            Metric::FBeta => baselines::f_beta(&binarize_adaptive(x), y, b.beta_sq_f),
            Metric::WeightedFBeta => baselines::f_beta_w(x, y, b),
            Metric::SMeasure => baselines::s_measure(x, y, b),
            Metric::EMeasure => baselines::e_measure(&binarize_adaptive(x), y),
            Metric::CMeasure => context_measure(x, y, &self.cm),
            Metric::CMeasureCamo => context_measure_camo(x, y, d.ok_or(Error::MissingImage)?, &self.cm_camo),
        }
    }

    /// Score oriented so that larger is better (`1 - MAE` for MAE).
    pub fn similarity(&self, metric: Metric, x: &GrayMap, y: &BinaryMask, image: Option<&RgbImage>) -> Result<f64> {
        let s = self.score(metric, x, y, image)?;
        Ok(if metric.higher_is_better() { s } else { 1.0 - s })
    }
}
