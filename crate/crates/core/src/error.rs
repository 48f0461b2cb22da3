use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("quadrature did not converge on [{a}, {b}] within {max_depth} refinement levels")]
    NonConvergence { a: f64, b: f64, max_depth: u32 },

    #[error("density ratio undefined at x = {x}: q(x) = 0")]
    UndefinedRatio { x: f64 },

    #[error("absolute continuity violated at x = {x}: p(x) > 0 but q(x) = 0")]
    AbsoluteContinuity { x: f64 },

    #[error("observation {x} has zero density under one of the hypotheses")]
    ZeroDensity { x: f64 },

    #[error("degenerate exponent fit: {0}")]
    DegenerateFit(String),

    #[error("record index {index} out of range for a dataset of {len} records")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("value {value} outside clamp bounds [{lo}, {hi}]")]
    OutOfBounds { value: f64, lo: f64, hi: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } => 3,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 4,
            _ => 2,
        }
    }
}
