use thiserror::Error;

/// Errors raised across the solver stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The starting vector of a Krylov process is zero.
    #[error("krylov breakdown at start: starting vector is zero")]
    BreakdownAtStart,

    /// No admissible restart length was found after the maximal number of halvings.
    #[error("stagnation: residual tolerance {tol:e} not met at dt = {dt:e} after {halvings} halvings")]
    Stagnation { tol: f64, dt: f64, halvings: u32 },

    #[error("no convergence after {restarts} restarts (remaining time {t_remaining:e})")]
    NonConvergence { restarts: usize, t_remaining: f64 },

    #[error("series truncation failed after {terms} terms")]
    TruncationFailure { terms: usize },

    #[error("outside the validity domain: {0}")]
    Domain(String),

    #[error("no admissible restart interval found")]
    Infeasible,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Short stable identifier, used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotSquare { .. } => "not_square",
            Error::DimensionCap { .. } => "dimension_cap",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::BreakdownAtStart => "breakdown_at_start",
            Error::Stagnation { .. } => "stagnation",
            Error::NonConvergence { .. } => "non_convergence",
            Error::TruncationFailure { .. } => "truncation_failure",
            Error::Domain(_) => "domain",
            Error::Infeasible => "infeasible",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }

    /// True for failures of a numerical method on valid input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::Stagnation { .. } | Error::NonConvergence { .. } | Error::TruncationFailure { .. } | Error::Infeasible
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}
