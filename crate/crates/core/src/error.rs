use thiserror::Error;

use crate::problem::ValidationReport;
use crate::projection::ProjectionResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("smoothing parameter must be positive, got {0}")]
    InvalidGamma(f64),

    #[error("delta {delta} out of range for dimension {dim} (need 1 < delta < K)")]
    DeltaOutOfRange { delta: usize, dim: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("affine minimizer is singular for a corral of {size} vertices")]
    DegenerateCorral { size: usize },

    #[error("iteration limit of {limit} reached")]
    MaxIterationsExceeded {
        limit: usize,
        best: Option<Box<ProjectionResult>>,
    },

    #[error("block {block}: {source}")]
    Block {
        block: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Lipschitz estimate needs at least two history entries")]
    InsufficientHistory,

    #[error("line search found no ascent")]
    NoImprovement,

    #[error("quality anchor is degenerate (best and zero values coincide)")]
    DegenerateAnchor,

    #[error("stage {stage} stalled: {reason}")]
    StageStall { stage: usize, reason: String },

    #[error("repair unavailable: {0}")]
    RepairUnavailable(String),

    #[error("candidate point is not feasible (max violation {0:e})")]
    InfeasibleCandidate(f64),

    #[error("greedy baseline could not place block {0}")]
    BaselineInfeasible(usize),

    #[error("problem is infeasible")]
    Infeasible,

    #[error("problem too large for the dense reference solver: {0}")]
    ScaleExceeded(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation failed: {0}")]
    Validation(ValidationReport),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn in_block(self, block: usize) -> Self {
        Error::Block {
            block,
            source: Box::new(self),
        }
    }
}
