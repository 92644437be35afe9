use std::path::PathBuf;

/// Errors surfaced by the simulator library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported field order {0}: must be a power of two in 2..=256")]
    UnsupportedField(usize),

    #[error("polynomial {poly:#x} is not primitive for GF({order})")]
    NotPrimitive { order: usize, poly: u32 },

    #[error("symbol value {value} out of range for GF({order})")]
    SymbolOutOfRange { value: u32, order: usize },

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("code construction failed: {0}")]
    CodeConstruction(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
