//! Byte-exact framing: every message travels as a 1-byte tag, a u32
//! big-endian payload length, and the payload itself.

use std::io::{Read, Write};

use crate::WireError;

/// Upper bound on a frame payload; a 50-transaction euro is ~58 KiB, so this
/// leaves generous headroom while bounding allocations.
pub const MAX_PAYLOAD: usize = 16 * 1024 * 1024;

/// Message-kind tags.
pub mod tag {
    pub const REGISTER: u8 = 0x01;
    pub const PARAMS_REQ: u8 = 0x02;
    pub const PARAMS_REP: u8 = 0x03;
    pub const WITHDRAW_INIT: u8 = 0x04;
    pub const WITHDRAW_NONCE: u8 = 0x05;
    pub const WITHDRAW_CHALLENGE: u8 = 0x06;
    pub const WITHDRAW_RESP: u8 = 0x07;
    pub const TRANSFER_INIT: u8 = 0x10;
    pub const TRANSFER_PAYLOAD: u8 = 0x11;
    pub const DEPOSIT_INIT: u8 = 0x12;
    pub const DEPOSIT_PAYLOAD: u8 = 0x13;
    pub const REVOKE_REQ: u8 = 0x20;
    pub const REVOKE_REP: u8 = 0x21;
    pub const ACK: u8 = 0x30;
    pub const ERR: u8 = 0x31;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub tag: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(tag: u8, payload: Vec<u8>) -> Self {
        Self { tag, payload }
    }

    /// Full frame encoding: tag, length, payload.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(5 + self.payload.len());
        buf.push(self.tag);
        buf.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        buf.extend_from_slice(&self.payload);
        buf
    }
}

pub fn write_frame<W: Write>(writer: &mut W, frame: &Frame) -> Result<(), WireError> {
    writer.write_all(&frame.to_bytes())?;
    writer.flush()?;
    Ok(())
}

/// Reads one frame. `Ok(None)` means the peer closed the stream cleanly
/// before a new frame started; EOF inside a frame is an error.
pub fn read_frame<R: Read>(reader: &mut R) -> Result<Option<Frame>, WireError> {
    let mut tag = [0u8; 1];
    if reader.read(&mut tag)? == 0 {
        return Ok(None);
    }
    let mut len_bytes = [0u8; 4];
    reader
        .read_exact(&mut len_bytes)
        .map_err(|_| WireError::Truncated)?;
    let len = u32::from_be_bytes(len_bytes) as usize;
    if len > MAX_PAYLOAD {
        return Err(WireError::OversizedFrame(len));
    }
    let mut payload = vec![0u8; len];
    reader
        .read_exact(&mut payload)
        .map_err(|_| WireError::Truncated)?;
    Ok(Some(Frame::new(tag[0], payload)))
}

/// Parses a frame from a self-contained byte slice, rejecting trailing bytes.
pub fn frame_from_bytes(bytes: &[u8]) -> Result<Frame, WireError> {
    let mut cursor = std::io::Cursor::new(bytes);
    let frame = read_frame(&mut cursor)?.ok_or(WireError::Truncated)?;
    if cursor.position() as usize != bytes.len() {
        return Err(WireError::TrailingBytes);
    }
    Ok(frame)
}
