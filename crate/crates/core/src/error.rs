//! Library-wide error type.
//!
//! Variants are grouped into families that the CLI maps onto distinct process
//! exit codes: configuration, parameter validation, bound applicability, and
//! numerical failures.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or model parameter that must be strictly positive is not.
    #[error("parameter `{name}` must be strictly positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    DomainError(String),

    /// A cumulant / moment / Gamma-operator order outside the supported range.
    #[error("order {order} out of range [{min}, {max}]")]
    OrderOutOfRange { order: i64, min: i64, max: i64 },

    /// The standing assumption `alpha1*alpha2 > 1 + |alpha1 - alpha2|` (or the
    /// family-specific `alpha > 1`) fails, so no closed-form bound applies.
    #[error("bound inapplicable: {0}")]
    BoundInapplicable(String),

    /// A kernel matrix is not symmetric within tolerance.
    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {defect}")]
    NotSymmetric { i: usize, j: usize, defect: f64 },

    /// The iterative eigensolver did not converge within its sweep budget.
    #[error("eigendecomposition failed to converge after {sweeps} sweeps (off-diagonal norm {offdiag})")]
    EigenFailure { sweeps: usize, offdiag: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    /// The cumulant expression under the square root is negative beyond
    /// floating-point noise; the input cannot come from a realizable element.
    #[error("negative radicand {value} in cumulant bound (tolerance {tolerance})")]
    NegativeRadicand { value: f64, tolerance: f64 },

    /// A mean-zero target was required but `p1*alpha2 != p2*alpha1`.
    #[error("target mean is not zero: p1*alpha2 - p2*alpha1 = {defect}")]
    MeanNotZero { defect: f64 },

    /// The grid cannot represent the requested function to tolerance.
    #[error("grid too coarse: spectral defect {defect} exceeds {tolerance}")]
    GridTooCoarse { defect: f64, tolerance: f64 },

    /// Doubling the time-quadrature nodes still moves the answer.
    #[error("time quadrature not converged: refinement changed result by {delta} (tolerance {tolerance})")]
    QuadratureNotConverged { delta: f64, tolerance: f64 },

    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("empty test-function dictionary")]
    EmptyDictionary,

    /// Bad experiment configuration (missing file, unparsable flag, ...).
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
