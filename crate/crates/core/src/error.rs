use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{what} is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { what: &'static str, deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("evolution time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error(
        "ambiguous steady state: kernel dimension > 1 \
         (second-smallest singular value {second:e}, largest {largest:e})"
    )]
    AmbiguousSteadyState { second: f64, largest: f64 },

    #[error("numerical routine did not converge: {0}")]
    NonConvergence(&'static str),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("expected {expected} angles, got {got}")]
    WrongAngleCount { expected: usize, got: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("physical invariant violated: {0}")]
    InvariantViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;
