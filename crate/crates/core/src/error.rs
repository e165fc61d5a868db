//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid address {addr}: {msg}")]
    InvalidAddress { addr: String, msg: String },

    #[error("operands live on different spaces")]
    SpaceMismatch,

    #[error("operation requires a nonempty subspace")]
    EmptySubspace,

    #[error("mark is not closed: node {addr} is a cluster point of the marked set")]
    NotClosed { addr: String },

    #[error("containment violation: {0}")]
    Containment(String),

    #[error("precondition failed at {addr}: {what}")]
    Precondition { what: String, addr: String },

    #[error("certificate rejected at {path}: {reason}")]
    CertificateRejected { path: String, reason: String },

    #[error("schema error at {path}: {msg}")]
    Schema { path: String, msg: String },

    /// Internal soundness tripwire; never an expected path.
    #[error("internal soundness fault: {0}")]
    Fault(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code classification for the command-line surface: usage and
    /// input-format problems exit 2, verification failures exit 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Schema { .. } | Error::Io(_) => 2,
            _ => 1,
        }
    }
}
