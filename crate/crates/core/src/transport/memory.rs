use std::sync::mpsc::{channel, Receiver, Sender};

use super::{check_node, Frame, LinkState, MessageKind, TrafficStats, Transport, MAX_NODES};
use crate::error::{Error, Result};

/// One endpoint of an in-process full mesh.
pub struct MemoryTransport {
    me: u8,
    outbox: Vec<Option<Sender<Frame>>>,
    inbox: Vec<Option<Receiver<Frame>>>,
    link: LinkState,
}

/// Builds a fully connected mesh of `nodes` endpoints (at most four).
pub fn memory_mesh(nodes: usize) -> Vec<MemoryTransport> {
    assert!(nodes <= MAX_NODES, "at most {MAX_NODES} nodes");
    let mut endpoints: Vec<MemoryTransport> = (0..nodes)
        .map(|me| MemoryTransport {
            me: me as u8,
            outbox: (0..MAX_NODES).map(|_| None).collect(),
            inbox: (0..MAX_NODES).map(|_| None).collect(),
            link: LinkState::default(),
        })
        .collect();
    for from in 0..nodes {
        for to in 0..nodes {
            if from == to {
                continue;
            }
            let (tx, rx) = channel();
            endpoints[from].outbox[to] = Some(tx);
            endpoints[to].inbox[from] = Some(rx);
        }
    }
    endpoints
}

impl Transport for MemoryTransport {
    fn node(&self) -> u8 {
        self.me
    }

    fn send(&mut self, to: u8, kind: MessageKind, payload: Vec<u64>) -> Result<()> {
        check_node(to)?;
        let frame = self.link.outgoing(self.me, to, kind, payload);
        let tx = self.outbox[to as usize]
            .as_ref()
            .ok_or_else(|| Error::Communication(format!("no link to node {to}")))?;
        tx.send(frame)
            .map_err(|_| Error::Communication(format!("node {to} has disconnected")))
    }

    fn recv(&mut self, from: u8, kind: MessageKind) -> Result<Vec<u64>> {
        check_node(from)?;
        let rx = self.inbox[from as usize]
            .as_ref()
            .ok_or_else(|| Error::Communication(format!("no link from node {from}")))?;
        let frame = rx
            .recv()
            .map_err(|_| Error::Communication(format!("node {from} has disconnected")))?;
        self.link.incoming(from, kind, frame)
    }

    fn stats(&self) -> TrafficStats {
        self.link.stats
    }
}
