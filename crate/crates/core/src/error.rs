use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid raster: {0}")]
    InvalidRaster(&'static str),
    #[error("dimension mismatch: {left_h}x{left_w} vs {right_h}x{right_w}")]
    DimensionMismatch {
        left_h: usize,
        left_w: usize,
        right_h: usize,
        right_w: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("foreground pixel set is empty")]
    EmptyForeground,
    #[error("covariance trace is not positive")]
    DegenerateCovariance,
    #[error("kernel half extent {half} exceeds the limit {limit} for this frame")]
    KernelTooLarge { half: usize, limit: usize },

    #[error("ground-truth mask has no foreground pixels")]
    EmptyGroundTruth,
    #[error("both masks are empty")]
    BothEmpty,

    #[error("context band is empty (object fills the frame)")]
    EmptyContext,
    #[error("region admits no full patch")]
    NoValidPatches,
    #[error("nearest-neighbour corpus is empty")]
    EmptyCorpus,

    #[error("rank lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("rank list is constant")]
    DegenerateRanks,
    #[error("invalid permutation")]
    InvalidPermutation,
    #[error("need at least {needed} items, got {got}")]
    TooFewItems { needed: usize, got: usize },
    #[error("metric requires the RGB image")]
    MissingImage,
    #[error("only {got} samples passed the quality filter, need {needed}")]
    TooFewQualifiedSamples { needed: usize, got: usize },
    #[error("noise candidate region is empty")]
    EmptyCandidateRegion,
}

impl Error {
    pub(crate) fn dims(left: (usize, usize), right: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            left_h: left.0,
            left_w: left.1,
            right_h: right.0,
            right_w: right.1,
        }
    }
}
