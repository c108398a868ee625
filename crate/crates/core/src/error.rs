use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mean offspring count {mu} is not supercritical (must exceed 2)")]
    MuNotSupercritical { mu: f64 },

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("invalid subcrossing count {z}: must be even and at least 2")]
    InvalidZ { z: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expected population {expected:.3e} after {generations} generations exceeds budget {budget:.3e}")]
    DepthOverflow {
        generations: u32,
        expected: f64,
        budget: f64,
    },

    #[error("node budget exceeded: {nodes:.3e} nodes requested, budget {budget}")]
    NodeBudgetExceeded { nodes: f64, budget: usize },

    #[error("only {found} grid points have an empirical probability strictly inside (0, 1); need {needed}")]
    InsufficientTailPoints { found: usize, needed: usize },

    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("tree has no durations assigned")]
    MissingDurations,

    #[error("level {level} is finer than the path resolution level {resolution}")]
    LevelTooFine { level: i32, resolution: i32 },

    #[error("no complete crossing at level {level}")]
    NoCompleteCrossing { level: i32 },

    #[error("insufficient crossings: {0}")]
    InsufficientCrossings(String),

    #[error("epsilon range infeasible: {0}")]
    EpsRangeInfeasible(String),

    #[error("dyadic level range infeasible: {0}")]
    LRangeInfeasible(String),

    #[error("line {line}: time {time} does not increase")]
    NonMonotoneTime { line: usize, time: f64 },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code for reports and exit-code mapping.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MuNotSupercritical { .. } => "MU_NOT_SUPERCRITICAL",
            Error::InvalidPmf(_) => "INVALID_PMF",
            Error::InvalidZ { .. } => "INVALID_Z",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::DepthOverflow { .. } => "DEPTH_OVERFLOW",
            Error::NodeBudgetExceeded { .. } => "NODE_BUDGET_EXCEEDED",
            Error::InsufficientTailPoints { .. } => "INSUFFICIENT_TAIL_POINTS",
            Error::MalformedRecord { .. } => "MALFORMED_RECORD",
            Error::MissingDurations => "MISSING_DURATIONS",
            Error::LevelTooFine { .. } => "LEVEL_TOO_FINE",
            Error::NoCompleteCrossing { .. } => "NO_COMPLETE_CROSSING",
            Error::InsufficientCrossings(_) => "INSUFFICIENT_CROSSINGS",
            Error::EpsRangeInfeasible(_) => "EPS_RANGE_INFEASIBLE",
            Error::LRangeInfeasible(_) => "L_RANGE_INFEASIBLE",
            Error::NonMonotoneTime { .. } => "NON_MONOTONE_TIME",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::Io(_) => "IO_ERROR",
            Error::Json(_) => "JSON_ERROR",
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::DepthOverflow { .. } | Error::NodeBudgetExceeded { .. }
        )
    }
}
