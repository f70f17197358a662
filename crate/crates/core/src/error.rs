use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("breakpoints must be strictly increasing (u[{index}] >= u[{next}])", next = .index + 1)]
    NonIncreasingBreakpoints { index: usize },

    #[error("diffusion a[{index}] = {value} is negative")]
    NegativeDiffusion { index: usize, value: f64 },

    #[error("field `{field}` has length {found}, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("field `{field}` needs at least {min} entries, found {found}")]
    TooFewEntries {
        field: &'static str,
        min: usize,
        found: usize,
    },

    #[error("field `{field}` has a non-finite entry at index {index}")]
    NonFiniteValue { field: &'static str, index: usize },

    #[error("problem file: field `{field}`: {message}")]
    ProblemParse { field: String, message: String },

    #[error("state {value} lies outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("probability {0} must lie strictly between 0 and 1")]
    ProbabilityOutOfRange(f64),

    #[error("empty gap: log_F_gap needs x > y, got x = {x}, y = {y}")]
    EmptyGap { x: f64, y: f64 },

    #[error("speed vector has length {found}, expected d = {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("gap of positive-diffusion interval {interval} is closed")]
    DegenerateGap { interval: usize },

    #[error("samples are not strictly increasing at index {index}")]
    NonMonotoneSamples { index: usize },

    #[error("level c = {0} must be nonnegative")]
    NegativeLevel(f64),

    #[error("weight w[{index}] = {value} must be positive")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("no convergence after {iterations} iterations (KKT violation {violation:e})")]
    MaxIterationsExceeded {
        iterations: usize,
        violation: f64,
        best: Vec<f64>,
    },

    #[error("point is outside the ordered cone at coordinate {index}")]
    InfeasiblePoint { index: usize },

    #[error("bad sampling window [{lo}, {hi}] with {count} points")]
    BadWindow { lo: f64, hi: f64, count: usize },

    #[error("xi_{k} is not in configuration {expected}")]
    WrongConfiguration { k: usize, expected: &'static str },

    #[error("unstable finite-difference parameters: {0}")]
    UnstableParameters(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
