use std::path::PathBuf;

use thiserror::Error;

/// Failures of the file formats and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] binrbm_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad IDX magic {found:#010x}, expected {expected:#010x}")]
    IdxMagic { path: PathBuf, found: u32, expected: u32 },

    #[error("{path}: IDX file truncated, need {needed} bytes, have {have}")]
    IdxTruncated { path: PathBuf, needed: u64, have: u64 },

    #[error("{path}: IDX length mismatch, header implies {expected} bytes, file has {found}")]
    IdxLength { path: PathBuf, expected: u64, found: u64 },

    #[error("{path}: not a {expected} file")]
    FormatMagic { path: PathBuf, expected: &'static str },

    #[error("{path}: format version {found_major}.{found_minor} is not readable by this build (supports {supported}.x)")]
    Version {
        path: PathBuf,
        found_major: u16,
        found_minor: u16,
        supported: u16,
    },

    #[error("{path}: payload checksum {computed:#018x} does not match stored {stored:#018x}")]
    Checksum { path: PathBuf, stored: u64, computed: u64 },

    #[error("{path}: malformed file: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// 1 for invalid input, 2 for I/O and format failures, 3 for a numerical
    /// abort during training.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(binrbm_core::Error::NumericalAbort { .. }) => 3,
            Error::Core(binrbm_core::Error::Sink(_)) => 2,
            Error::Core(_) | Error::Usage(_) => 1,
            _ => 2,
        }
    }
}
