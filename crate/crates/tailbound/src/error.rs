use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Mismatched dimensions (vector lengths, matrix shapes, ragged rows).
    #[error("shape error: {0}")]
    Shape(String),
    /// The request exceeds the desk-scale enumeration or simulation caps.
    #[error("resource error: {0}")]
    Resource(String),
    /// The operation does not support the requested variant.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Malformed textual input (flags, CSV cells, numeric literals).
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
