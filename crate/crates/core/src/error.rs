use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("dimension {dim} exceeds the configured limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("operator is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid measurement basis: {0}")]
    InvalidBasis(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("parameter {name} = {value} outside range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("game file error at {path}: {message}")]
    GameFile { path: String, message: String },

    /// Every problem found in a game file, each prefixed with its field path.
    #[error("invalid game file: {}", .0.join("; "))]
    Schema(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
