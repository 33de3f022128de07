//! Meta-measures: experiments that score the metrics themselves.
//!
//! - MM1: agreement of metric-induced rankings with human rankings.
//! - MM2: a correct ground truth should beat a mismatched one.
//! - MM3: faint background noise should not raise the score.
//! - MM4: score change under one-pixel erosion or dilation of the truth.
//!
//! Every protocol is split into independent units plus an aggregation step.
//! Random draws come from a ChaCha stream keyed by `(seed, unit index)`, so a
//! parallel driver that evaluates units in any order gets exactly the serial
//! result.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::baselines::f_beta;
use crate::metrics::{Metric, MetricSuite};
use crate::morphology::{morph, MorphOp};
use crate::raster::{binarize_adaptive, ensure_same_dims, BinaryMask, GrayMap, RgbImage};
use crate::{Error, Result};

/// Minimum F1 of the adaptively binarized prediction for MM2/MM3.
pub const QUALITY_F1: f64 = 0.6;
/// Fraction of pixels perturbed in MM3.
pub const NOISE_FRACTION: f64 = 0.01;
/// Standard deviation of MM3 noise.
pub const NOISE_SIGMA: f64 = 0.2;
/// Prediction ceiling of the restricted MM3 candidate region.
pub const QUIET_CEILING: f64 = 0.1;

/// One prediction with its ground truth and optional source image.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePair {
    pub id: String,
    pub fm: GrayMap,
    pub gt: BinaryMask,
    pub image: Option<RgbImage>,
}

impl SamplePair {
    pub fn new(id: impl Into<String>, fm: GrayMap, gt: BinaryMask, image: Option<RgbImage>) -> Result<Self> {
        ensure_same_dims(fm.dims(), gt.dims())?;
        if let Some(img) = &image {
            ensure_same_dims(img.dims(), gt.dims())?;
        }
        Ok(Self { id: id.into(), fm, gt, image })
    }
}

/// Three predictions of one scene with their human ranking (1 = best).
#[derive(Debug, Clone, PartialEq)]
pub struct RankedGroup {
    pub id: String,
    pub gt: BinaryMask,
    pub image: Option<RgbImage>,
    pub fms: Vec<GrayMap>,
    pub human_rank: Vec<u32>,
}

impl RankedGroup {
    pub const SIZE: usize = 3;

    pub fn new(
        id: impl Into<String>,
        gt: BinaryMask,
        image: Option<RgbImage>,
        fms: Vec<GrayMap>,
        human_rank: Vec<u32>,
    ) -> Result<Self> {
        if fms.len() != Self::SIZE {
            return Err(Error::TooFewItems { needed: Self::SIZE, got: fms.len() });
        }
        if human_rank.len() != fms.len() {
            return Err(Error::LengthMismatch(human_rank.len(), fms.len()));
        }
        let mut seen = vec![false; fms.len()];
        for &r in &human_rank {
            let slot = (r as usize).checked_sub(1).and_then(|i| seen.get_mut(i)).ok_or(Error::InvalidPermutation)?;
            if core::mem::replace(slot, true) {
                return Err(Error::InvalidPermutation);
            }
        }
        for fm in &fms {
            ensure_same_dims(fm.dims(), gt.dims())?;
        }
        if let Some(img) = &image {
            ensure_same_dims(img.dims(), gt.dims())?;
        }
        Ok(Self { id: id.into(), gt, image, fms, human_rank })
    }
}

/// A scoring function; larger must mean better.
pub trait Scorer {
    fn name(&self) -> String;

    fn score(&self, fm: &GrayMap, gt: &BinaryMask, image: Option<&RgbImage>) -> Result<f64>;
}

/// A [`Metric`] oriented as a similarity.
#[derive(Debug, Clone, Copy)]
pub struct MetricScorer<'a> {
    pub suite: &'a MetricSuite,
    pub metric: Metric,
}

impl Scorer for MetricScorer<'_> {
    fn name(&self) -> String {
        self.metric.name().into()
    }

    fn score(&self, fm: &GrayMap, gt: &BinaryMask, image: Option<&RgbImage>) -> Result<f64> {
        self.suite.similarity(self.metric, fm, gt, image)
    }
}

/// Wraps a closure as a [`Scorer`].
pub struct FnScorer<F> {
    pub name: &'static str,
    pub f: F,
}

impl<F> Scorer for FnScorer<F>
where
    F: Fn(&GrayMap, &BinaryMask, Option<&RgbImage>) -> Result<f64>,
{
    fn name(&self) -> String {
        self.name.into()
    }

    fn score(&self, fm: &GrayMap, gt: &BinaryMask, image: Option<&RgbImage>) -> Result<f64> {
        (self.f)(fm, gt, image)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Mm1,
    Mm2,
    Mm3,
    Mm4Erode,
    Mm4Dilate,
}

impl Protocol {
    pub const ALL: [Protocol; 5] = [Protocol::Mm1, Protocol::Mm2, Protocol::Mm3, Protocol::Mm4Erode, Protocol::Mm4Dilate];

    pub const fn name(self) -> &'static str {
        match self {
            Protocol::Mm1 => "mm1",
            Protocol::Mm2 => "mm2",
            Protocol::Mm3 => "mm3",
            Protocol::Mm4Erode => "mm4-erode",
            Protocol::Mm4Dilate => "mm4-dilate",
        }
    }

    /// Whether the protocol draws random numbers.
    pub const fn is_seeded(self) -> bool {
        matches!(self, Protocol::Mm2 | Protocol::Mm3)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidParameter("unknown protocol name"))
    }
}

/// Outcome of one protocol unit (a group or a pair).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Value(f64),
    /// The unit cannot be scored under the protocol (degenerate ranks, an
    /// emptied ground truth) and is counted separately.
    Excluded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaResult {
    pub metric: String,
    pub protocol: Protocol,
    /// Mean theta (MM1), error rate (MM2, MM3) or mean |delta| (MM4);
    /// `None` when every unit was excluded.
    pub statistic: Option<f64>,
    pub sample_count: usize,
    pub excluded: usize,
    pub seed: u64,
}

/// Averages unit outcomes in index order.
pub fn aggregate(metric: String, protocol: Protocol, outcomes: &[Outcome], seed: u64) -> MetaResult {
    let mut total = 0.0;
    let mut counted = 0usize;
    for o in outcomes {
        if let Outcome::Value(v) = o {
            total += v;
            counted += 1;
        }
    }
    MetaResult {
        metric,
        protocol,
        statistic: (counted > 0).then(|| total / counted as f64),
        sample_count: counted,
        excluded: outcomes.len() - counted,
        seed,
    }
}

/// The random stream of unit `index` under `seed`.
pub fn unit_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let shared = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = shared;
        }
        i = j;
    }
    ranks
}

/// `1 - rho` for Spearman's rank correlation, ties averaged.
pub fn spearman_theta(metric_ranks: &[f64], human_ranks: &[f64]) -> Result<f64> {
    if metric_ranks.len() != human_ranks.len() {
        return Err(Error::LengthMismatch(metric_ranks.len(), human_ranks.len()));
    }
    if metric_ranks.len() < 2 {
        return Err(Error::TooFewItems { needed: 2, got: metric_ranks.len() });
    }
    let a = average_ranks(metric_ranks);
    let b = average_ranks(human_ranks);
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(&b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::DegenerateRanks);
    }
    let rho = (sab / libm::sqrt(saa * sbb)).clamp(-1.0, 1.0);
    Ok(1.0 - rho)
}

/// Theta of one group; constant metric scores exclude the group.
pub fn mm1_unit<S: Scorer + ?Sized>(group: &RankedGroup, scorer: &S) -> Result<Outcome> {
    let mut negated = Vec::with_capacity(group.fms.len());
    for fm in &group.fms {
        negated.push(-scorer.score(fm, &group.gt, group.image.as_ref())?);
    }
    let human: Vec<f64> = group.human_rank.iter().map(|&r| r as f64).collect();
    match spearman_theta(&negated, &human) {
        Ok(theta) => Ok(Outcome::Value(theta)),
        Err(Error::DegenerateRanks) => Ok(Outcome::Excluded),
        Err(e) => Err(e),
    }
}

pub fn mm1_run<S: Scorer + ?Sized>(groups: &[RankedGroup], scorer: &S, seed: u64) -> Result<MetaResult> {
    let outcomes = groups.iter().map(|g| mm1_unit(g, scorer)).collect::<Result<Vec<_>>>()?;
    Ok(aggregate(scorer.name(), Protocol::Mm1, &outcomes, seed))
}

/// A uniformly random permutation of `0..n` with no fixed point, drawn by
/// reshuffling until none remains.
pub fn derangement(n: usize, seed: u64) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::TooFewItems { needed: 2, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        perm.shuffle(&mut rng);
        if perm.iter().enumerate().all(|(i, &p)| i != p) {
            return Ok(perm);
        }
    }
}

/// F1 of the adaptively binarized prediction; zero for an empty truth.
pub fn quality_f1(pair: &SamplePair) -> f64 {
    let x = binarize_adaptive(&pair.fm);
    f_beta(&x, &pair.gt, 1.0).unwrap_or(0.0)
}

/// Indices of pairs that pass the F1 filter.
pub fn qualified(pairs: &[SamplePair]) -> Result<Vec<usize>> {
    let keep: Vec<usize> = (0..pairs.len()).filter(|&i| quality_f1(&pairs[i]) >= QUALITY_F1).collect();
    if keep.len() < 2 {
        return Err(Error::TooFewQualifiedSamples { needed: 2, got: keep.len() });
    }
    Ok(keep)
}

/// Qualified pairs and the pseudo-truth each one receives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mm2Plan {
    pub qualified: Vec<usize>,
    /// `pseudo[i]` is the pair whose truth replaces that of `qualified[i]`.
    pub pseudo: Vec<usize>,
}

pub fn mm2_plan(pairs: &[SamplePair], seed: u64) -> Result<Mm2Plan> {
    let qualified = qualified(pairs)?;
    let perm = derangement(qualified.len(), seed)?;
    let pseudo = perm.iter().map(|&j| qualified[j]).collect();
    Ok(Mm2Plan { qualified, pseudo })
}

/// 1 when the mismatched truth scores strictly higher than the real one.
pub fn mm2_unit<S: Scorer + ?Sized>(pairs: &[SamplePair], plan: &Mm2Plan, i: usize, scorer: &S) -> Result<Outcome> {
    let pair = &pairs[plan.qualified[i]];
    let (h, w) = pair.gt.dims();
    let pseudo = pairs[plan.pseudo[i]].gt.resize_nearest(w, h)?;
    if pseudo.is_empty() {
        return Ok(Outcome::Excluded);
    }
    let image = pair.image.as_ref();
    let real = scorer.score(&pair.fm, &pair.gt, image)?;
    let fake = scorer.score(&pair.fm, &pseudo, image)?;
    Ok(Outcome::Value(if fake > real { 1.0 } else { 0.0 }))
}

pub fn mm2_run<S: Scorer + ?Sized>(pairs: &[SamplePair], scorer: &S, seed: u64) -> Result<MetaResult> {
    let plan = mm2_plan(pairs, seed)?;
    let outcomes = (0..plan.qualified.len()).map(|i| mm2_unit(pairs, &plan, i, scorer)).collect::<Result<Vec<_>>>()?;
    Ok(aggregate(scorer.name(), Protocol::Mm2, &outcomes, seed))
}

/// Where MM3 may place noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidateMode {
    /// Every ground-truth background pixel.
    #[default]
    Background,
    /// Background pixels whose prediction is below [`QUIET_CEILING`].
    QuietBackground,
}

impl CandidateMode {
    pub const fn name(self) -> &'static str {
        match self {
            CandidateMode::Background => "background",
            CandidateMode::QuietBackground => "quiet-background",
        }
    }
}

impl FromStr for CandidateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [CandidateMode::Background, CandidateMode::QuietBackground]
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidParameter("unknown candidate mode"))
    }
}

/// Adds `N(0, 0.2^2)` noise to `floor(0.01 HW)` distinct candidate pixels
/// (fewer if the region is smaller), clamping results into `[0, 1]`.
pub fn inject_noise_with<R: Rng + ?Sized>(fm: &GrayMap, gt: &BinaryMask, mode: CandidateMode, rng: &mut R) -> Result<GrayMap> {
    ensure_same_dims(fm.dims(), gt.dims())?;
    let candidates: Vec<usize> = (0..gt.values().len())
        .filter(|&i| {
            !gt.values()[i] && (mode == CandidateMode::Background || fm.values()[i] < QUIET_CEILING)
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::EmptyCandidateRegion);
    }
    let budget = libm::floor(NOISE_FRACTION * gt.values().len() as f64) as usize;
    let amount = budget.min(candidates.len());
    let normal = Normal::new(0.0, NOISE_SIGMA).expect("sigma is positive");
    let mut values = fm.values().to_vec();
    for k in index::sample(rng, candidates.len(), amount).into_iter() {
        let p = candidates[k];
        values[p] = (values[p] + normal.sample(rng)).clamp(0.0, 1.0);
    }
    GrayMap::new(fm.width(), fm.height(), values)
}

/// [`inject_noise_with`] on the stream `(seed, 0)`.
pub fn inject_noise(fm: &GrayMap, gt: &BinaryMask, seed: u64, mode: CandidateMode) -> Result<GrayMap> {
    inject_noise_with(fm, gt, mode, &mut unit_rng(seed, 0))
}

/// Noisy prediction for pair `index`, independent of the metric.
pub fn mm3_noisy(pair: &SamplePair, index: usize, seed: u64, mode: CandidateMode) -> Result<GrayMap> {
    inject_noise_with(&pair.fm, &pair.gt, mode, &mut unit_rng(seed, index as u64))
}

/// 1 when the noisy prediction scores strictly higher than the clean one.
pub fn mm3_unit<S: Scorer + ?Sized>(pair: &SamplePair, noisy: &GrayMap, scorer: &S) -> Result<Outcome> {
    let image = pair.image.as_ref();
    let clean = scorer.score(&pair.fm, &pair.gt, image)?;
    let dirty = scorer.score(noisy, &pair.gt, image)?;
    Ok(Outcome::Value(if dirty > clean { 1.0 } else { 0.0 }))
}

pub fn mm3_run<S: Scorer + ?Sized>(pairs: &[SamplePair], scorer: &S, seed: u64, mode: CandidateMode) -> Result<MetaResult> {
    let keep = qualified(pairs)?;
    let mut outcomes = Vec::with_capacity(keep.len());
    for &i in &keep {
        let noisy = mm3_noisy(&pairs[i], i, seed, mode)?;
        outcomes.push(mm3_unit(&pairs[i], &noisy, scorer)?);
    }
    Ok(aggregate(scorer.name(), Protocol::Mm3, &outcomes, seed))
}

/// Radius of the MM4 structuring element.
pub const MM4_RADIUS: usize = 1;

/// `|score(fm, morph(gt)) - score(fm, gt)|`; excluded if erosion empties
/// the truth.
pub fn mm4_unit<S: Scorer + ?Sized>(pair: &SamplePair, op: MorphOp, scorer: &S) -> Result<Outcome> {
    let moved = morph(&pair.gt, op, MM4_RADIUS)?;
    if moved.is_empty() {
        return Ok(Outcome::Excluded);
    }
    let image = pair.image.as_ref();
    let base = scorer.score(&pair.fm, &pair.gt, image)?;
    let shifted = scorer.score(&pair.fm, &moved, image)?;
    Ok(Outcome::Value(libm::fabs(shifted - base)))
}

pub fn mm4_run<S: Scorer + ?Sized>(pairs: &[SamplePair], scorer: &S, op: MorphOp, seed: u64) -> Result<MetaResult> {
    let outcomes = pairs.iter().map(|p| mm4_unit(p, op, scorer)).collect::<Result<Vec<_>>>()?;
    let protocol = match op {
        MorphOp::Erode => Protocol::Mm4Erode,
        MorphOp::Dilate => Protocol::Mm4Dilate,
    };
    Ok(aggregate(scorer.name(), protocol, &outcomes, seed))
}
