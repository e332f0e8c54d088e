//! Wire protocol for the offline euro parties: length-prefixed framing, the
//! message set connecting registration, parameter fetch, the three-leg
//! withdrawal, two-leg transfers, deposits and revocation, plus in-process
//! and TCP transport bindings with drivers for each role.
//!
//! The frame grammar and message layouts are documented with hex examples in
//! `FORMATS.md` at the repository root; they are normative and bit-exact.

pub mod frame;
pub mod message;
pub mod session;
pub mod transport;

use thiserror::Error;

pub use frame::{Frame, MAX_PAYLOAD};
pub use message::{ErrCode, Message};
pub use session::DepositVerdict;
pub use transport::{Connection, InprocNetwork, Network, TcpNetwork, Transcript};

#[derive(Debug, Error)]
pub enum WireError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Codec(#[from] offline_euro::CodecError),
    #[error("unknown message tag {0:#04x}")]
    UnknownTag(u8),
    #[error("truncated frame")]
    Truncated,
    #[error("trailing bytes after message")]
    TrailingBytes,
    #[error("frame payload of {0} bytes exceeds the limit")]
    OversizedFrame(usize),
    #[error("invalid flag or enum byte")]
    BadFlag,
    #[error("invalid utf-8 string")]
    BadString,
    #[error("peer closed the connection mid-protocol")]
    ConnectionClosed,
    #[error("unexpected message tag {tag:#04x}")]
    Unexpected { tag: u8 },
    #[error("peer replied {code:?}: {detail}")]
    Reply { code: ErrCode, detail: String },
    #[error("party error: {0}")]
    Party(String),
}

impl WireError {
    pub(crate) fn party(err: impl std::fmt::Display) -> Self {
        WireError::Party(err.to_string())
    }
}
