use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("time {t} outside signal horizon [{t0}, {horizon}]")]
    OutOfHorizon { t: f64, t0: f64, horizon: f64 },

    #[error("time {t} is not on the sample grid")]
    OffGrid { t: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid window [{a}, {b}]: {reason}")]
    InvalidWindow { a: f64, b: f64, reason: &'static str },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("undeclared predicate `{0}`")]
    UndeclaredPredicate(String),

    #[error("invalid interval [{a}, {b}]: {reason}")]
    InvalidInterval { a: f64, b: f64, reason: &'static str },

    #[error("invalid predicate `{id}`: {reason}")]
    InvalidPredicate { id: String, reason: String },

    #[error("expert does not satisfy specification (robustness {rho0})")]
    UnsatisfyingExpert { rho0: f64 },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("no feasible path to any goal")]
    Infeasible,

    #[error("environment generation failed after {attempts} attempts")]
    Generation { attempts: usize },

    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("expert planning failed: {0}")]
    PlanFailed(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
