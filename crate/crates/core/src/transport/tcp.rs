use std::io::{BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::thread;
use std::time::{Duration, Instant};

use log::debug;

use super::{check_node, Frame, LinkState, MessageKind, TrafficStats, Transport, COORDINATOR, MAX_NODES};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TcpOptions {
    /// How long to keep retrying connects and waiting for accepts.
    pub connect_timeout: Duration,
}

impl Default for TcpOptions {
    fn default() -> Self {
        TcpOptions { connect_timeout: Duration::from_secs(30) }
    }
}

struct Link {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

/// Full-mesh TCP transport. Within each pair of parties the lower id
/// listens; the coordinator always dials. The dialing side opens every
/// connection with an empty setup frame that identifies it.
pub struct TcpTransport {
    me: u8,
    links: Vec<Option<Link>>,
    link: LinkState,
}

impl TcpTransport {
    fn empty(me: u8) -> Self {
        TcpTransport { me, links: (0..MAX_NODES).map(|_| None).collect(), link: LinkState::default() }
    }

    /// Brings up party `me`'s side of the mesh. `peers` lists the listen
    /// addresses of parties 0, 1, 2 (this party's own entry is ignored).
    /// Returns once every other party and, if `with_coordinator`, the
    /// coordinator are connected.
    pub fn party(
        me: u8,
        listener: TcpListener,
        peers: &[SocketAddr],
        with_coordinator: bool,
        opts: &TcpOptions,
    ) -> Result<Self> {
        if me >= 3 {
            return Err(Error::argument(format!("party id {me} must be 0, 1 or 2")));
        }
        if peers.len() != 3 {
            return Err(Error::argument(format!("expected 3 peer addresses, got {}", peers.len())));
        }
        let deadline = Instant::now() + opts.connect_timeout;
        let mut t = TcpTransport::empty(me);
        for lower in 0..me {
            let stream = dial(peers[lower as usize], deadline)?;
            t.attach(lower, stream)?;
            t.send(lower, MessageKind::Setup, Vec::new())?;
        }
        let mut expected: Vec<u8> = ((me + 1)..3).collect();
        if with_coordinator {
            expected.push(COORDINATOR);
        }
        listener.set_nonblocking(true)?;
        while !expected.is_empty() {
            match listener.accept() {
                Ok((stream, addr)) => {
                    stream.set_nonblocking(false)?;
                    let mut reader = BufReader::new(stream.try_clone()?);
                    let hello = Frame::read_from(&mut reader)?;
                    let who = hello.sender;
                    if hello.kind != MessageKind::Setup || !expected.contains(&who) {
                        return Err(Error::protocol(format!(
                            "unexpected connection from {addr} claiming node {who}"
                        )));
                    }
                    debug!("party {me}: accepted node {who} from {addr}");
                    expected.retain(|&x| x != who);
                    stream.set_nodelay(true)?;
                    t.links[who as usize] = Some(Link { reader, writer: BufWriter::new(stream) });
                    t.link.skip_incoming(who);
                }
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                    if Instant::now() > deadline {
                        return Err(Error::Communication(format!(
                            "party {me} timed out waiting for nodes {expected:?}"
                        )));
                    }
                    thread::sleep(Duration::from_millis(5));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Ok(t)
    }

    /// Connects the coordinator to all three parties.
    pub fn coordinator(peers: &[SocketAddr], opts: &TcpOptions) -> Result<Self> {
        if peers.len() != 3 {
            return Err(Error::argument(format!("expected 3 party addresses, got {}", peers.len())));
        }
        let deadline = Instant::now() + opts.connect_timeout;
        let mut t = TcpTransport::empty(COORDINATOR);
        for (id, addr) in peers.iter().enumerate() {
            let stream = dial(*addr, deadline)?;
            t.attach(id as u8, stream)?;
            t.send(id as u8, MessageKind::Setup, Vec::new())?;
        }
        Ok(t)
    }

    fn attach(&mut self, peer: u8, stream: TcpStream) -> Result<()> {
        stream.set_nodelay(true)?;
        let reader = BufReader::new(stream.try_clone()?);
        self.links[peer as usize] = Some(Link { reader, writer: BufWriter::new(stream) });
        Ok(())
    }

    fn link_mut(&mut self, peer: u8) -> Result<&mut Link> {
        check_node(peer)?;
        self.links[peer as usize]
            .as_mut()
            .ok_or_else(|| Error::Communication(format!("no connection to node {peer}")))
    }
}

fn dial(addr: SocketAddr, deadline: Instant) -> Result<TcpStream> {
    loop {
        match TcpStream::connect(addr) {
            Ok(s) => return Ok(s),
            Err(e) => {
                if Instant::now() > deadline {
                    return Err(Error::Communication(format!("could not connect to {addr}: {e}")));
                }
                thread::sleep(Duration::from_millis(20));
            }
        }
    }
}

/// Resolves `host:port` strings.
pub fn resolve(addr: &str) -> Result<SocketAddr> {
    addr.to_socket_addrs()
        .map_err(|e| Error::argument(format!("bad address {addr}: {e}")))?
        .next()
        .ok_or_else(|| Error::argument(format!("address {addr} did not resolve")))
}

impl Transport for TcpTransport {
    fn node(&self) -> u8 {
        self.me
    }

    fn send(&mut self, to: u8, kind: MessageKind, payload: Vec<u64>) -> Result<()> {
        let frame = self.link.outgoing(self.me, to, kind, payload);
        let link = self.link_mut(to)?;
        frame
            .write_to(&mut link.writer)
            .and_then(|_| link.writer.flush())
            .map_err(|e| Error::Communication(format!("send to node {to}: {e}")))
    }

    fn recv(&mut self, from: u8, kind: MessageKind) -> Result<Vec<u64>> {
        let link = self.link_mut(from)?;
        let frame = Frame::read_from(&mut link.reader)?;
        self.link.incoming(from, kind, frame)
    }

    fn stats(&self) -> TrafficStats {
        self.link.stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loopback_mesh_exchanges_frames() {
        let listeners: Vec<TcpListener> =
            (0..3).map(|_| TcpListener::bind("127.0.0.1:0").unwrap()).collect();
        let addrs: Vec<SocketAddr> = listeners.iter().map(|l| l.local_addr().unwrap()).collect();
        let opts = TcpOptions { connect_timeout: Duration::from_secs(10) };
        let handles: Vec<_> = listeners
            .into_iter()
            .enumerate()
            .map(|(id, l)| {
                let addrs = addrs.clone();
                let opts = opts.clone();
                thread::spawn(move || {
                    let mut t = TcpTransport::party(id as u8, l, &addrs, true, &opts).unwrap();
                    let next = ((id + 1) % 3) as u8;
                    let prev = ((id + 2) % 3) as u8;
                    t.send(next, MessageKind::Data, vec![id as u64 * 10]).unwrap();
                    let got = t.recv(prev, MessageKind::Data).unwrap();
                    let cmd = t.recv(COORDINATOR, MessageKind::Setup).unwrap();
                    t.send(COORDINATOR, MessageKind::Open, vec![got[0] + cmd[0]]).unwrap();
                })
            })
            .collect();
        let mut coord = TcpTransport::coordinator(&addrs, &opts).unwrap();
        for p in 0..3 {
            coord.send(p, MessageKind::Setup, vec![1]).unwrap();
        }
        let mut replies: Vec<u64> =
            (0..3).map(|p| coord.recv(p, MessageKind::Open).unwrap()[0]).collect();
        replies.sort();
        assert_eq!(replies, vec![1, 11, 21]);
        for h in handles {
            h.join().unwrap();
        }
    }
}
