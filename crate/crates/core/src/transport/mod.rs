//! Point-to-point message transport between the three computing parties and
//! the coordinator.
//!
//! Node ids 0, 1, 2 are computing parties; [`COORDINATOR`] is the driver. Every
//! directed link carries round-tagged [`Frame`]s and delivers them in send
//! order. Two implementations exist: an in-process channel mesh for
//! simulation and a TCP mesh.

mod frame;
mod memory;
mod tcp;

pub use frame::{Frame, MessageKind, HEADER_LEN, MAX_PAYLOAD};
pub use memory::{memory_mesh, MemoryTransport};
pub use tcp::{resolve, TcpOptions, TcpTransport};

use crate::error::{Error, Result};

/// Node id of the coordinator process.
pub const COORDINATOR: u8 = 3;
/// Parties plus coordinator.
pub const MAX_NODES: usize = 4;

/// Per-endpoint traffic counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrafficStats {
    pub messages_sent: u64,
    /// Ring elements sent (payload words).
    pub elements_sent: u64,
    /// Bytes sent including frame headers.
    pub bytes_sent: u64,
    pub messages_received: u64,
    pub elements_received: u64,
}

impl TrafficStats {
    pub fn since(&self, earlier: &TrafficStats) -> TrafficStats {
        TrafficStats {
            messages_sent: self.messages_sent - earlier.messages_sent,
            elements_sent: self.elements_sent - earlier.elements_sent,
            bytes_sent: self.bytes_sent - earlier.bytes_sent,
            messages_received: self.messages_received - earlier.messages_received,
            elements_received: self.elements_received - earlier.elements_received,
        }
    }
}

pub trait Transport: Send {
    /// This endpoint's node id.
    fn node(&self) -> u8;

    fn send(&mut self, to: u8, kind: MessageKind, payload: Vec<u64>) -> Result<()>;

    /// Blocks until the next frame from `from` arrives. The frame must be of
    /// the expected kind and carry the next round number on that link.
    fn recv(&mut self, from: u8, kind: MessageKind) -> Result<Vec<u64>>;

    fn stats(&self) -> TrafficStats;
}

/// Round counters and statistics common to both transports.
#[derive(Debug, Default)]
pub(crate) struct LinkState {
    send_round: [u64; MAX_NODES],
    recv_round: [u64; MAX_NODES],
    stats: TrafficStats,
}

impl LinkState {
    pub(crate) fn outgoing(&mut self, me: u8, to: u8, kind: MessageKind, payload: Vec<u64>) -> Frame {
        let round = self.send_round[to as usize];
        self.send_round[to as usize] += 1;
        self.stats.messages_sent += 1;
        self.stats.elements_sent += payload.len() as u64;
        self.stats.bytes_sent += (HEADER_LEN + 8 * payload.len()) as u64;
        Frame { kind, round, sender: me, payload }
    }

    pub(crate) fn incoming(&mut self, from: u8, kind: MessageKind, frame: Frame) -> Result<Vec<u64>> {
        let expected = self.recv_round[from as usize];
        if frame.sender != from {
            return Err(Error::protocol(format!(
                "frame on link from node {from} claims sender {}",
                frame.sender
            )));
        }
        if frame.round != expected {
            return Err(Error::protocol(format!(
                "round mismatch from node {from}: expected {expected}, got {}",
                frame.round
            )));
        }
        if frame.kind != kind {
            return Err(Error::protocol(format!(
                "expected {kind:?} frame from node {from}, got {:?}",
                frame.kind
            )));
        }
        self.recv_round[from as usize] += 1;
        self.stats.messages_received += 1;
        self.stats.elements_received += frame.payload.len() as u64;
        Ok(frame.payload)
    }

    /// Marks an already-consumed frame (connection identification) as received.
    pub(crate) fn skip_incoming(&mut self, from: u8) {
        self.recv_round[from as usize] += 1;
        self.stats.messages_received += 1;
    }
}

pub(crate) fn check_node(id: u8) -> Result<()> {
    if (id as usize) < MAX_NODES {
        Ok(())
    } else {
        Err(Error::argument(format!("node id {id} out of range")))
    }
}
