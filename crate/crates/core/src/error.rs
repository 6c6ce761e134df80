use thiserror::Error;

use crate::glm::Coefficients;

/// Errors produced anywhere in the band pipeline.
///
/// Variants are grouped by stage so the CLI and the C ABI can map them to
/// stable exit/status codes via [`Error::kind`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error on line {line}: {message}")]
    Validation { line: usize, message: String },

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("information matrix is singular or not positive definite: {0}")]
    DegenerateInformation(String),

    #[error("fit did not converge after {iterations} iterations (last iterate {last:?})")]
    NonConvergence { iterations: usize, last: Coefficients },

    #[error("data are separated; the maximum-likelihood estimate does not exist ({0})")]
    Separation(String),

    #[error("matrix is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("critical-value solver failed: {0}")]
    Solver(String),

    #[error("simulation degenerate: all {replications} replications failed to fit")]
    SimulationDegenerate { replications: usize },
}

/// Coarse classification used for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Fit,
    Geometry,
    Solver,
    Simulation,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io(_)
            | Error::Parse { .. }
            | Error::Validation { .. }
            | Error::DegenerateDesign(_)
            | Error::InvalidInput(_) => ErrorKind::Input,
            Error::DegenerateInformation(_) | Error::NonConvergence { .. } | Error::Separation(_) => ErrorKind::Fit,
            Error::NotPsd { .. } | Error::DegenerateGeometry(_) => ErrorKind::Geometry,
            Error::Solver(_) => ErrorKind::Solver,
            Error::SimulationDegenerate { .. } => ErrorKind::Simulation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
