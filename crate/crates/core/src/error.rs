use thiserror::Error;

use crate::ensemble::SectionIndex;

/// Errors surfaced by the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ensemble parameters: {0}")]
    InvalidParams(String),

    #[error("density T = {0} requires gamma2 >= 2 (no off-segment sections to couple to)")]
    DegenerateCoupling(f64),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid window specification: {0}")]
    InvalidWindow(String),

    #[error("invalid decode schedule: {0}")]
    InvalidSchedule(String),

    #[error(
        "window decode failed at TVN ({}, {}) after {iterations} iterations: {reason} (value {value:e})",
        tvn.i, tvn.j
    )]
    WindowDecodeFailure {
        tvn: SectionIndex,
        iterations: usize,
        value: f64,
        reason: FailureReason,
    },

    #[error("chain decode failed at window {t}: {source}")]
    ChainDecodeFailure {
        t: usize,
        #[source]
        source: Box<Error>,
        partial: Box<crate::window::IterationProfile>,
    },

    #[error("search space is empty: {0}")]
    EmptySpace(String),

    #[error("evaluation of window {spec:?} failed: {source}")]
    Evaluation {
        spec: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("graph sampling exhausted retries for VN {vn} in section ({}, {})", section.i, section.j)]
    SamplingExhausted { section: SectionIndex, vn: usize },

    #[error("enumeration too large: {0}")]
    EnumerationTooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Why a per-window decode stopped short of the target erasure probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    /// DE reached a fixed point above the target.
    FixedPoint,
    /// The per-window iteration cap ran out.
    IterationCap,
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureReason::FixedPoint => write!(f, "stalled at a fixed point"),
            FailureReason::IterationCap => write!(f, "iteration cap reached"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
