use thiserror::Error;

/// Errors produced by curve construction, alignment, registration and clustering.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain [{t_min}, {t_max}]: t_min must be finite and below t_max")]
    InvalidDomain { t_min: f64, t_max: f64 },
    #[error("curve {0:?} has no events")]
    EmptyCurve(String),
    #[error("curve {id:?}: event time {time} lies outside [{t_min}, {t_max}]")]
    OutOfDomain {
        id: String,
        time: f64,
        t_min: f64,
        t_max: f64,
    },
    #[error("curve {0:?} is already anchored")]
    AlreadyAnchored(String),
    #[error("curve {0:?}: events crowd the domain endpoint and cannot be moved inward")]
    AnchorCollision(String),
    #[error("curve {id:?}: {reason}")]
    InvalidValues { id: String, reason: String },
    #[error("curve {0:?} must be anchored before alignment")]
    UnanchoredInput(String),
    #[error("curves {0:?} and {1:?} live on different domains")]
    DomainMismatch(String, String),
    #[error("forced pair ({0}, {1}) cannot lie on a valid alignment path")]
    InvalidForcedPair(usize, usize),
    #[error("alignment does not fit sequences of lengths ({expected_source}, {expected_target})")]
    ShapeMismatch {
        expected_source: usize,
        expected_target: usize,
    },
    #[error("enumeration limited to lengths <= {limit}, got ({source_len}, {target_len})")]
    TooLarge {
        source_len: usize,
        target_len: usize,
        limit: usize,
    },
    #[error("slope parameter must be positive and finite, got {0}")]
    NonPositiveDelta(f64),
    #[error("at least two curves are required, got {0}")]
    TooFewCurves(usize),
    #[error("estimate for {estimate:?} does not belong to curve {curve:?}")]
    IdMismatch { curve: String, estimate: String },
    #[error("grid needs at least 2 points, got {0}")]
    BadGrid(usize),
    #[error("warping estimates are not on the same grid")]
    GridMismatch,
    #[error("empty group")]
    EmptyGroup,
    #[error("k = {k} is invalid for {n} points")]
    BadK { k: usize, n: usize },
    #[error("silhouette requires at least two clusters")]
    SingleCluster,
    #[error("empty k range")]
    EmptyRange,
    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),
    #[error("warp amplitude {0} cannot guarantee strictly increasing warps")]
    BadAmplitude(f64),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
