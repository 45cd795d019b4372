use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the calibration toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input at row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("maturity column `{0}` not found in input")]
    MissingMaturity(String),
    #[error("duplicate date {date} at row {row}")]
    DuplicateDate { date: String, row: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("series too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("zero variance: {0}")]
    ZeroVariance(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("translation failed: {0}")]
    ShiftFailed(String),
    #[error("non-adjacent merge request: {0}")]
    NonAdjacentMerge(String),
    #[error("segment {start}-{end} cannot be validated at any admissible length")]
    Unsegmentable { start: usize, end: usize },
    #[error("ARIMA fit did not converge: {0}")]
    NonConvergence(String),
    #[error("value {value} outside the support of the {family} family")]
    OutOfSupport { family: &'static str, value: f64 },
    #[error("no eligible candidate: {0}")]
    NoEligibleCandidate(String),
    #[error("no mean reversion: autoregression estimate {0} outside (0, 1)")]
    NoMeanReversion(f64),
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            e if e.is_data_error() => 2,
            _ => 3,
        }
    }

    /// Whether the error stems from the data rather than from numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::MalformedRow { .. }
                | Error::MissingMaturity(_)
                | Error::DuplicateDate { .. }
                | Error::InvalidInput(_)
                | Error::TooShort { .. }
                | Error::LengthMismatch { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
