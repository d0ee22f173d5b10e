use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // bundle
    #[error("missing bundle file {0}")]
    MissingFile(PathBuf),
    #[error("bundle metadata mismatch: {0}")]
    MetaMismatch(String),
    #[error("non-finite embedding entry at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("malformed meta.json: {0}")]
    MalformedMeta(String),
    #[error("empty token on vocab line {line}")]
    EmptyToken { line: usize },
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid lookup policy: at least one candidate rule must be enabled")]
    InvalidPolicy,
    #[error("token {0:?} not found in vocabulary")]
    NotFound(String),

    // probe sets
    #[error("unknown probe set {0:?}")]
    UnknownSet(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate value {0} in probe set")]
    DuplicateValue(f64),
    #[error("invalid probe set: {0}")]
    InvalidSet(String),
    #[error("tokens missing from vocabulary: {}", .0.join(", "))]
    MissingTokens(Vec<String>),

    // pca
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("first and last positions coincide; cannot align")]
    DegenerateEndpoints,
    #[error("non-positive value {0} has no logarithm")]
    NonPositiveValue(f64),
    #[error("values must be strictly increasing")]
    NotIncreasing,

    // metrics
    #[error("too few points: need at least {need}, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("cluster has zero spread")]
    ZeroSpread,

    // synth
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    // report
    #[error("scatter plot needs two-dimensional coordinates, got {0}")]
    NotTwoDimensional(usize),
    #[error("strip layout has no rows")]
    EmptyLayout,
    #[error("cannot plot {0} sets in one scatter (at most 2)")]
    TooManySets(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::MissingFile(_))
    }
}
