use thiserror::Error;

/// Errors raised by the micromaser toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truncated space needs n_max >= 1, got {0}")]
    SpaceTooSmall(usize),

    #[error("dimension mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    DimensionMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("moment of order {order} overflows f64")]
    MomentOverflow { order: usize },

    #[error("degenerate Gram matrix at degree {degree}: measure has only {support} support point(s)")]
    DegenerateBasis { degree: usize, support: usize },

    #[error("requested order {requested} exceeds basis degree {available}")]
    OrderTooHigh { requested: usize, available: usize },

    #[error("superoperator is not trace preserving (defect {defect:e})")]
    NotTracePreserving { defect: f64 },

    #[error("no null vector: smallest eigenvalue magnitude {smallest:e} above tolerance {tolerance:e}")]
    NoNullVector { smallest: f64, tolerance: f64 },

    #[error("degenerate steady state: second eigenvalue magnitude {second:e} below {tolerance:e}")]
    DegenerateNullSpace { second: f64, tolerance: f64 },

    #[error("cutoff {n_cut} is below the first excited state")]
    UnusableCutoff { n_cut: usize },

    #[error("truncation search hit the hard cap n_max = {cap} (tail {tail:e})")]
    TruncationCapReached { cap: usize, tail: f64 },

    #[error("photon distribution diverges at the truncation boundary (last ratio {ratio})")]
    NonConvergent { ratio: f64 },

    #[error("mean photon number {mean:e} too small for `{quantity}`")]
    Undefined { quantity: &'static str, mean: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
