use thiserror::Error;

/// Errors raised while decoding canonical byte encodings.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("wrong encoding length: expected {expected} bytes, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("invalid {group} element encoding")]
    InvalidElement { group: &'static str },
    #[error("scalar encoding is not canonical")]
    NonCanonicalScalar,
    #[error("truncated input")]
    Truncated,
    #[error("trailing bytes after decoding")]
    TrailingBytes,
    #[error("parameter set mismatch: expected {expected:?}, got {got:?}")]
    ParamsMismatch { expected: String, got: String },
}
