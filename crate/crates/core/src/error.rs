use thiserror::Error;

/// Errors raised by partition construction and the ensemble computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("label {label} at point {point} is out of range for {clusters} clusters")]
    LabelOutOfRange {
        point: usize,
        label: usize,
        clusters: usize,
    },

    #[error("{clusters} clusters exceed {points} data points")]
    TooManyClusters { clusters: usize, points: usize },

    #[error("partition needs at least one cluster and one data point")]
    EmptyPartition,

    #[error("column {column} sums to {sum}, not one")]
    ColumnSum { column: usize, sum: f64 },

    #[error("entry ({row}, {column}) = {value} lies outside [0, 1]")]
    EntryOutOfRange { row: usize, column: usize, value: f64 },

    #[error("operation requires a hard partition")]
    NotHard,

    #[error("sample is empty")]
    EmptySample,

    #[error("combinatorial guard exceeded: {what} ({count} > {limit})")]
    GuardExceeded {
        what: &'static str,
        count: u128,
        limit: u128,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("input contains no data")]
    EmptyInput,

    #[error("I/O error: {0}")]
    Io(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// True for errors caused by a computation budget rather than bad input.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::GuardExceeded { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
