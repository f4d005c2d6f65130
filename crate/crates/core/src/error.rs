use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("too large for exact enumeration: {what} = {value} exceeds {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("numerical abort at step {step}: non-finite {term} gradient at ({row}, {col})")]
    NumericalAbort {
        step: usize,
        term: &'static str,
        row: usize,
        col: usize,
    },
    #[error("trajectory sink failed: {0}")]
    Sink(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_dim(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}
