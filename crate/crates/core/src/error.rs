use thiserror::Error;

use crate::report::ValidationReport;

/// Errors raised by constructors and numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid matrix: {summary}")]
    InvalidMatrix {
        summary: String,
        report: Box<ValidationReport>,
    },

    #[error("{name} = {value} lies outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("point ({lambda}, {mu}) is not on the extreme arc: {detail}")]
    OffCurve { lambda: f64, mu: f64, detail: String },

    #[error("incompatible pair: {0}")]
    Incompatible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::NumericalFailure(_))
    }
}
