use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index ({row}, {col}) out of range for a {n_rows}x{n_cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("matrix dimensions {n_rows}x{n_cols} overflow the index type")]
    DimensionOverflow { n_rows: usize, n_cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix has no nonzero entries")]
    ZeroMatrix,
    #[error("M-norm quadratic form is negative ({0:e}); step size violates eta*||A|| < 1")]
    NegativeMetric(f64),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid batch: {0}")]
    InvalidBatch(String),
    #[error("column index {index} out of range for batch width {width}")]
    ColumnOutOfRange { index: usize, width: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid strong branching request: {0}")]
    InvalidRequest(String),
    #[error("instance too large for the reference oracle: n = {0}, m = {1}, but n + m may be at most {max}", max = crate::oracle::MAX_ORACLE_SIZE)]
    OracleTooLarge(usize, usize),
    #[error("MPS parse error at line {line}: {message}")]
    Mps { line: usize, message: String },
    #[error("instance generation error: {0}")]
    Generate(String),
    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
