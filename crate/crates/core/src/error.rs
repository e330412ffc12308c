use thiserror::Error;

use crate::interval_ts::YearMonth;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the forecasting library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("missing month {0} in the covered span")]
    MissingMonth(YearMonth),

    #[error("invalid interval [{lower}, {upper}]: lower bound exceeds upper bound")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("periods must be strictly increasing and contiguous (at index {0})")]
    NonContiguousPeriods(usize),

    #[error("non-positive bound {value} at index {index} cannot be log-transformed")]
    NonPositiveBound { index: usize, value: f64 },

    #[error("series is already on {0} scale")]
    ScaleMismatch(&'static str),

    #[error("series too short: need at least {needed} points, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("insufficient extrema for envelope construction")]
    InsufficientExtrema,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in input")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rank-deficient regressor matrix: {0}")]
    RankDeficient(&'static str),

    #[error("degenerate series: {0}")]
    Degenerate(&'static str),

    #[error("unsupported design: {0}")]
    UnsupportedDesign(String),

    #[error("schema error at line {line}: {message}")]
    Schema { line: u64, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the failure is a data problem rather than a numerical one.
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self,
            Error::Numerical(_) | Error::InsufficientExtrema | Error::RankDeficient(_)
        )
    }
}
