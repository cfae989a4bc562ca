use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid granularity {0}: must be at least 1")]
    InvalidGranularity(u32),

    #[error("empty stream set: lower[{k}] = {lower} exceeds upper[{k}] = {upper}")]
    EmptyStreamSet { k: usize, lower: u64, upper: u64 },

    #[error("empty curve set")]
    EmptyCurveSet,

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("inconsistent service stream: {0}")]
    InconsistentService(String),

    #[error("{path}: {msg}")]
    Io { path: String, msg: String },

    #[error("blocking generator: {0}")]
    BlockingGenerator(String),
}
