use thiserror::Error;

/// Errors raised by game construction, equilibrium computation and the integrators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid RPS parameters: {0}")]
    InvalidRps(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("not a simplex point: {0}")]
    NotInSimplex(String),

    #[error("enumeration guard: n = {n} exceeds the limit of {limit} strategies")]
    TooManyStrategies { n: usize, limit: usize },

    #[error("restriction lemma hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("Shapley triangle is degenerate or empty (game is not outward cycling)")]
    DegenerateTriangle,

    #[error("best-reply precondition violated: {0}")]
    BestReplyPrecondition(String),

    #[error("improvement principle violated on transition {from} -> {to}")]
    ImprovementPrinciple { from: usize, to: usize },

    #[error("event limit of {0} reached")]
    EventLimit(usize),

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("time {t} outside trajectory range [0, {end}]")]
    TimeOutOfRange { t: f64, end: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
