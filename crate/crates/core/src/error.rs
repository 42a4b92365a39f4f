//! Crate-wide error type. Every fallible operation reports the violated
//! precondition or numerical contract through one of these variants.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error("grid needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("grid origin must be finite, got {0}")]
    InvalidOrigin(f64),
    #[error("expected {expected} samples for this grid, got {got}")]
    SampleCountMismatch { expected: usize, got: usize },
    #[error("non-finite sample at node {index}")]
    NonFiniteSample { index: usize },
    #[error("non-finite evaluation target")]
    NonFiniteTarget,
    #[error("operands live on different grids")]
    GridMismatch,

    #[error("coefficient `{name}` must be real-valued; node {index} has imaginary part {im:e}")]
    ComplexCoefficient {
        name: &'static str,
        index: usize,
        im: f64,
    },
    #[error("diffusion coefficient is negative at node {index}: {value}")]
    NegativeDiffusion { index: usize, value: f64 },
    #[error("Re(a0) must be >= 0 for a well-posed multiplier family, got {0}")]
    NegativeDiffusionSymbol(f64),
    #[error("symbol grows without bound in frequency (Re(a0)=0 with Im(b0)!=0)")]
    UnboundedSymbol,
    #[error("dense path supports at most {max} points, got {got}")]
    MatrixTooLarge { got: usize, max: usize },
    #[error("matrix entries must be finite")]
    NonFiniteMatrix,

    #[error("time must be >= 0 and finite, got {0}")]
    InvalidTime(f64),
    #[error("iteration count must be >= 1")]
    ZeroIterations,
    #[error("quadrature order must be >= 2, got {0}")]
    QuadratureOrderTooSmall(usize),
    #[error("quadrature size must be >= 1")]
    EmptyQuadrature,
    #[error("need at least {need} time values, got {got}")]
    TooFewTimeValues { need: usize, got: usize },
    #[error("time values must be positive and finite")]
    InvalidTimeValue,
    #[error("time values must span at least two decades")]
    NarrowTimeSpan,
    #[error("growth-bound trial function has zero sup norm")]
    ZeroNormTrial,
    #[error("no trial functions supplied")]
    NoTrials,

    #[error("series weight must be nonzero and finite")]
    InvalidSeriesWeight,
    #[error("tolerance must be positive and finite, got {0:e}")]
    InvalidTolerance(f64),
    #[error("series did not reach tolerance within {cap} terms; the scheme is likely mis-scaled")]
    SeriesCapExceeded { cap: usize },

    #[error("refinement ladder must be non-empty and strictly increasing")]
    InvalidLadder,
    #[error("curve lengths differ: {ns} n-values vs {errors} errors")]
    CurveLengthMismatch { ns: usize, errors: usize },
    #[error("error values must be finite and >= 0")]
    InvalidErrorValue,
    #[error("curve scale must be positive and finite")]
    InvalidScale,
    #[error("comparison sequence must be positive and finite")]
    NonPositiveComparison,

    #[error("Re(lambda) = {re_lambda} must exceed the scheme growth bound {bound}")]
    SpectralBound { re_lambda: f64, bound: f64 },
    #[error("Laplace truncation estimate {estimate:e} exceeds tolerance {tol:e}; increase t_max")]
    TruncationTooLarge { estimate: f64, tol: f64 },
    #[error("invalid quadrature window: {0}")]
    InvalidQuadratureWindow(&'static str),
    #[error("resolvent denominator vanishes near mode {mode} (lambda in the symbol range)")]
    ResolventSingular { mode: i64 },

    #[error("expression error: {0}")]
    Expr(String),
}
