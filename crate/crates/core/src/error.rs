use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin magnitude {0}: must be a positive half-integer")]
    InvalidSpin(f64),

    #[error("site index {site} out of range for a {sites}-site network")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid {path}: {reason}")]
    Validation { path: String, reason: String },

    #[error("site selection must be nonempty")]
    EmptySelection,

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("steady-state kernel vector has vanishing trace ({trace:e})")]
    NoTrace { trace: f64 },

    #[error("steady state is not unique (kernel dimension {kernel_dim})")]
    DegenerateKernel { kernel_dim: usize },

    #[error("integrator step too large at t = {time}: local error {error:e} exceeds {tol:e}")]
    StepTooLarge { time: f64, error: f64, tol: f64 },

    #[error("perturbation order {order} unsolvable: right-hand side has cokernel component {component:e}")]
    Unsolvable { order: usize, component: f64 },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("operation requires J = 1/2 on both sites (got local dimension {0})")]
    WrongDimension(usize),

    #[error("analysis window too short: {samples} samples")]
    WindowTooShort { samples: usize },

    #[error("zero detuning in {0}")]
    ZeroDetuning(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
