use thiserror::Error;

use crate::matrix::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    Invalid(ValidationReport),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty state")]
    EmptyState,

    #[error(
        "limit does not exist in closed form: I - AW is singular (rcond = {rcond:e}); run classify"
    )]
    Singular { rcond: f64 },

    #[error("series convergence not guaranteed: a_{node} = 1")]
    SeriesNotGuaranteed { node: usize },

    #[error("strict interior damping required: a_{node} = {value} is not in (0, 1)")]
    NotStrictInterior { node: usize, value: f64 },

    #[error("{name} = {value} is out of range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("structure: {0}")]
    Structure(String),

    #[error("{0}")]
    Scenario(String),

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
