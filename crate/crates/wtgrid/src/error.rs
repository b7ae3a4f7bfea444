use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range (length {len})")]
    OutOfRange { index: i64, len: u64 },

    #[error("occurrence {k} of bit {bit} not found (total {total})")]
    SelectNotFound { bit: u8, k: u64, total: u64 },

    #[error("empty range: {0}")]
    EmptyRange(String),

    #[error("rank {k} out of range [1, {max}]")]
    RankOutOfRange { k: u64, max: u64 },

    #[error("point ({x}, {y}) not found")]
    PointNotFound { x: u64, y: u64 },

    #[error("coordinate {value} exceeds universe bound {bound}")]
    UniverseExceeded { value: u64, bound: u64 },

    #[error("malformed input at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("container format error: {0}")]
    Format(String),

    #[error("checksum mismatch in section `{0}`")]
    Checksum(String),

    #[error("unsupported container version {found} (expected {expected})")]
    Version { found: u16, expected: u16 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
