//! Wire framing shared by every connection in a session.
//!
//! ```text
//! +----------------+--------+---------------+--------+--------------------------+
//! | payload length | type   | round counter | sender | payload                  |
//! | u32 BE         | u8     | u64 BE        | u8     | n x u64 LE ring elements |
//! +----------------+--------+---------------+--------+--------------------------+
//! ```
//!
//! The length prefix counts payload bytes only; it is always a multiple of 8.

use std::io::{self, Read, Write};

use crate::error::{Error, Result};

pub const HEADER_LEN: usize = 4 + 1 + 8 + 1;

/// Upper bound on a single payload (64 MiB).
pub const MAX_PAYLOAD: u32 = 64 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageKind {
    Data = 0x01,
    Setup = 0x02,
    Open = 0x03,
}

impl MessageKind {
    pub fn from_byte(b: u8) -> Result<Self> {
        match b {
            0x01 => Ok(MessageKind::Data),
            0x02 => Ok(MessageKind::Setup),
            0x03 => Ok(MessageKind::Open),
            other => Err(Error::protocol(format!("unknown message type 0x{other:02x}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: MessageKind,
    pub round: u64,
    pub sender: u8,
    pub payload: Vec<u64>,
}

impl Frame {
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + 8 * self.payload.len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&((self.payload.len() * 8) as u32).to_be_bytes());
        out.push(self.kind as u8);
        out.extend_from_slice(&self.round.to_be_bytes());
        out.push(self.sender);
        for w in &self.payload {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(&self.encode())
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut cursor = bytes;
        let frame = Self::read_from(&mut cursor)?;
        if !cursor.is_empty() {
            return Err(Error::Format(format!("{} trailing bytes after frame", cursor.len())));
        }
        Ok(frame)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => Error::Communication("connection closed by peer".into()),
            _ => Error::Communication(e.to_string()),
        })?;
        let len = u32::from_be_bytes(header[0..4].try_into().unwrap());
        if len % 8 != 0 {
            return Err(Error::Format(format!("payload length {len} is not a multiple of 8")));
        }
        if len > MAX_PAYLOAD {
            return Err(Error::Format(format!("payload length {len} exceeds {MAX_PAYLOAD}")));
        }
        let kind = MessageKind::from_byte(header[4])?;
        let round = u64::from_be_bytes(header[5..13].try_into().unwrap());
        let sender = header[13];
        let mut body = vec![0u8; len as usize];
        r.read_exact(&mut body)
            .map_err(|e| Error::Communication(format!("truncated frame body: {e}")))?;
        let payload = body
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Frame { kind, round, sender, payload })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_bit_exact() {
        let f = Frame { kind: MessageKind::Data, round: 0x0102, sender: 2, payload: vec![1, 0xAABB] };
        let bytes = f.encode();
        assert_eq!(
            bytes,
            vec![
                0, 0, 0, 16, // length, big-endian
                0x01, // type
                0, 0, 0, 0, 0, 0, 0x01, 0x02, // round, big-endian
                2,    // sender
                1, 0, 0, 0, 0, 0, 0, 0, // little-endian ring element
                0xBB, 0xAA, 0, 0, 0, 0, 0, 0,
            ]
        );
        assert_eq!(Frame::decode(&bytes).unwrap(), f);
    }

    #[test]
    fn rejects_bad_frames() {
        let mut bytes = Frame { kind: MessageKind::Open, round: 1, sender: 0, payload: vec![7] }.encode();
        bytes[4] = 0x09;
        assert!(matches!(Frame::decode(&bytes), Err(Error::Protocol(_))));

        let mut bytes = Frame { kind: MessageKind::Open, round: 1, sender: 0, payload: vec![7] }.encode();
        bytes[3] = 7;
        assert!(matches!(Frame::decode(&bytes), Err(Error::Format(_))));

        let bytes = Frame { kind: MessageKind::Setup, round: 1, sender: 0, payload: vec![7, 8] }.encode();
        assert!(matches!(Frame::decode(&bytes[..bytes.len() - 3]), Err(Error::Communication(_))));
    }
}
