use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |a_ij - conj(a_ji)| = {deviation:e})")]
    NonHermitianInput { deviation: f64 },

    #[error("density matrix lost positivity (min eigenvalue {min_eigenvalue:e})")]
    PositivityViolation { min_eigenvalue: f64 },

    #[error("integration step too large at t = {time}: {detail}")]
    StepTooLarge { time: f64, detail: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(
        "Liouvillian is singular: no unique stationary state (smallest singular values {:e}, {:e})",
        smallest_singular_values[0],
        smallest_singular_values[1]
    )]
    DegenerateLiouvillian { smallest_singular_values: [f64; 2] },

    #[error("closed-form denominator vanishes (|den| = {magnitude:e})")]
    DegenerateDenominator { magnitude: f64 },

    #[error("relaxation did not reach a stationary state (residual {residual:e})")]
    NotConverged { residual: f64 },

    #[error("parameters outside the closed-form domain: {0}")]
    OutOfDomain(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown steady-state solver `{0}`")]
    UnknownSolver(String),

    #[error("unknown self-test suite `{0}`")]
    UnknownSuite(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable tag, used in CSV error cells.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonHermitianInput { .. } => "non_hermitian",
            Error::PositivityViolation { .. } => "positivity_violation",
            Error::StepTooLarge { .. } => "step_too_large",
            Error::InvalidParams(_) => "invalid_params",
            Error::DegenerateLiouvillian { .. } => "degenerate",
            Error::DegenerateDenominator { .. } => "degenerate_denominator",
            Error::NotConverged { .. } => "not_converged",
            Error::OutOfDomain(_) => "out_of_domain",
            Error::UnknownPreset(_) => "unknown_preset",
            Error::UnknownSolver(_) => "unknown_solver",
            Error::UnknownSuite(_) => "unknown_suite",
            Error::InvalidSweep(_) => "invalid_sweep",
            Error::Io { .. } => "io",
        }
    }
}
