use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the index, bounds and ingestion layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("time series must contain at least one sample")]
    EmptySeries,

    #[error("sample {index} is not finite ({value})")]
    NonFiniteSample { index: usize, value: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("length {length} is not divisible by segment count {segments}")]
    NotDivisible { length: usize, segments: usize },

    #[error("sequence of length {length} cannot be extended to {lmax}; lmax must be strictly greater")]
    ExtensionTooShort { length: usize, lmax: usize },

    #[error("an envelope needs a finite band radius")]
    UnboundedEnvelope,

    #[error("invalid warping path: {0}")]
    InvalidPath(String),

    #[error("brute-force enumeration limited to n + m <= {cap}, got {total}")]
    OracleTooLarge { total: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("duplicate sequence id {0}")]
    DuplicateId(u64),

    #[error("{path}: line {line}, field {field}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        field: usize,
        message: String,
    },

    #[error("not an index file (bad magic bytes)")]
    BadMagic,

    #[error("unsupported index format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("index file checksum mismatch (stored {stored:08x}, computed {computed:08x})")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error("index file truncated: {0}")]
    Truncated(String),

    #[error("malformed index file: {0}")]
    Malformed(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
