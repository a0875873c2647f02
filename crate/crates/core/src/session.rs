//! Session plumbing: pairwise key agreement between the parties, the
//! party-side command loop, and the coordinator that drives MWEM through it.
//!
//! The coordinator holds no shares. It sends the workload once, then one
//! selection and one measurement command per iteration, and receives only
//! the opened index and measurement.

use std::thread;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::dp::{LAP_OPEN_LABEL, QEM_OPEN_LABEL};
use crate::error::{Error, Result};
use crate::mwem::{eval_workload_shared, LinearQuery, MechanismBackend};
use crate::par::Exec;
use crate::ring::{FixedPointCodec, RING_BITS};
use crate::sharing::{collect_opened, OpenRecord, Party, PartyConfig, PartyId, PrfKey, PrfKeys, RandomSource, RepShare};
use crate::transport::{memory_mesh, MemoryTransport, MessageKind, TrafficStats, Transport, COORDINATOR};

pub const PROTOCOL_VERSION: u64 = 1;

const OP_WORKLOAD: u64 = 1;
const OP_SELECT: u64 = 2;
const OP_MEASURE: u64 = 3;
const OP_SHUTDOWN: u64 = 4;

fn hello(codec: &FixedPointCodec) -> [u64; 3] {
    [PROTOCOL_VERSION, RING_BITS as u64, codec.frac_bits() as u64]
}

fn check_hello(me: &str, peer: &str, codec: &FixedPointCodec, got: &[u64]) -> Result<()> {
    if got.len() < 3 {
        return Err(Error::protocol(format!("{me}: short handshake from {peer}")));
    }
    let ours = hello(codec);
    if got[0] != ours[0] {
        return Err(Error::protocol(format!("{me}: {peer} speaks protocol version {}, expected {}", got[0], ours[0])));
    }
    if got[1] != ours[1] || got[2] != ours[2] {
        return Err(Error::protocol(format!(
            "{me}: codec mismatch with {peer}: k={} f={} vs local k={} f={}",
            got[1], got[2], ours[1], ours[2]
        )));
    }
    Ok(())
}

fn key_words(k: &PrfKey) -> [u64; 2] {
    [u64::from_le_bytes(k[..8].try_into().unwrap()), u64::from_le_bytes(k[8..].try_into().unwrap())]
}

fn key_from_words(a: u64, b: u64) -> PrfKey {
    let mut k = [0u8; 16];
    k[..8].copy_from_slice(&a.to_le_bytes());
    k[8..].copy_from_slice(&b.to_le_bytes());
    k
}

/// Runs the party-to-party handshake: both neighbors must agree on
/// protocol version and codec, and each adjacent pair derives its PRF key
/// as the XOR of one contribution from each side.
pub fn establish<T: Transport>(id: PartyId, mut transport: T, config: PartyConfig) -> Result<Party<T>> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.local_seed);
    rng.set_stream(1);
    let mut mine_next = PrfKey::default();
    let mut mine_prev = PrfKey::default();
    rng.fill_bytes(&mut mine_next);
    rng.fill_bytes(&mut mine_prev);

    let h = hello(&config.codec);
    for (peer, key) in [(id.next(), &mine_next), (id.prev(), &mine_prev)] {
        let mut msg = h.to_vec();
        msg.extend(key_words(key));
        transport.send(peer.raw(), MessageKind::Setup, msg)?;
    }
    let me = format!("party {id}");
    let mut theirs = [PrfKey::default(); 2];
    for (slot, peer) in [id.next(), id.prev()].into_iter().enumerate() {
        let got = transport.recv(peer.raw(), MessageKind::Setup)?;
        check_hello(&me, &format!("party {peer}"), &config.codec, &got)?;
        if got.len() != 5 {
            return Err(Error::protocol(format!("{me}: malformed key share from party {peer}")));
        }
        theirs[slot] = key_from_words(got[3], got[4]);
    }
    let xor = |a: &PrfKey, b: &PrfKey| -> PrfKey { std::array::from_fn(|i| a[i] ^ b[i]) };
    let mut pair_keys = [PrfKey::default(); 3];
    pair_keys[id.index()] = xor(&mine_next, &theirs[0]);
    pair_keys[id.prev().index()] = xor(&mine_prev, &theirs[1]);
    let keys = PrfKeys::for_party(id, &pair_keys);
    Ok(Party::new(id, transport, keys, config))
}

/// What a party reports after the coordinator shuts the session down.
#[derive(Debug, Clone)]
pub struct ServeSummary {
    pub open_log: Vec<OpenRecord>,
    pub stats: TrafficStats,
    pub selections: usize,
    pub measurements: usize,
}

/// Answers coordinator commands until shutdown. `histogram` is this
/// party's share of the aggregated cell counts.
pub fn serve<T: Transport>(party: &mut Party<T>, histogram: &[RepShare], exec: Exec) -> Result<ServeSummary> {
    let codec = party.codec();
    let me = format!("party {}", party.id());
    let greeting = party.transport_mut().recv(COORDINATOR, MessageKind::Setup)?;
    let reply = {
        let mut r = hello(&codec).to_vec();
        r.push(histogram.len() as u64);
        r
    };
    party.transport_mut().send(COORDINATOR, MessageKind::Setup, reply)?;
    check_hello(&me, "coordinator", &codec, &greeting)?;
    if greeting.get(3) != Some(&(histogram.len() as u64)) {
        return Err(Error::protocol(format!(
            "{me}: coordinator expects {:?} cells, local shares cover {}",
            greeting.get(3),
            histogram.len()
        )));
    }

    let mut answers: Option<Vec<RepShare>> = None;
    let mut summary = ServeSummary { open_log: Vec::new(), stats: TrafficStats::default(), selections: 0, measurements: 0 };
    loop {
        let cmd = party.transport_mut().recv(COORDINATOR, MessageKind::Setup)?;
        match cmd.first().copied() {
            Some(OP_WORKLOAD) => {
                let (queries, cells) = (word(&cmd, 1)? as usize, word(&cmd, 2)? as usize);
                if cells != histogram.len() || cmd.len() != 3 + queries * cells {
                    return Err(Error::protocol(format!("{me}: malformed workload command")));
                }
                let workload = cmd[3..]
                    .chunks_exact(cells.max(1))
                    .map(|c| LinearQuery::new(c.iter().map(|&b| f64::from_bits(b)).collect()))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::protocol(format!("{me}: bad workload: {e}")))?;
                answers = Some(eval_workload_shared(&workload, histogram, &codec, exec)?);
            }
            Some(OP_SELECT) => {
                let ans = answers.as_ref().ok_or_else(|| Error::protocol(format!("{me}: selection before workload")))?;
                let eps = f64::from_bits(word(&cmd, 1)?);
                let approx: Vec<f64> = cmd[2..].iter().map(|&b| f64::from_bits(b)).collect();
                if approx.len() != ans.len() {
                    return Err(Error::protocol(format!("{me}: {} approximate answers for {} queries", approx.len(), ans.len())));
                }
                let k = party.qem_shared(std::slice::from_ref(ans), &[approx], eps)?;
                party.open_to_coordinator(QEM_OPEN_LABEL, &k)?;
                summary.selections += 1;
            }
            Some(OP_MEASURE) => {
                let ans = answers.as_ref().ok_or_else(|| Error::protocol(format!("{me}: measurement before workload")))?;
                let index = word(&cmd, 1)? as usize;
                let b = f64::from_bits(word(&cmd, 2)?);
                let target = *ans
                    .get(index.wrapping_sub(1))
                    .ok_or_else(|| Error::protocol(format!("{me}: query index {index} out of range")))?;
                let m = party.lap_shared(&[target], b)?;
                party.open_to_coordinator(LAP_OPEN_LABEL, &m)?;
                summary.measurements += 1;
            }
            Some(OP_SHUTDOWN) => break,
            other => return Err(Error::protocol(format!("{me}: unknown command {other:?}"))),
        }
    }
    summary.open_log = party.open_log().to_vec();
    summary.stats = party.stats();
    Ok(summary)
}

fn word(cmd: &[u64], i: usize) -> Result<u64> {
    cmd.get(i).copied().ok_or_else(|| Error::protocol("truncated command"))
}

/// Drives the three parties; implements the mechanisms for [`run_mwem`].
///
/// [`run_mwem`]: crate::mwem::run_mwem
pub struct Coordinator<T: Transport> {
    transport: T,
    codec: FixedPointCodec,
    queries: usize,
    reveals: Vec<(&'static str, usize)>,
}

impl<T: Transport> Coordinator<T> {
    /// Checks every party's protocol version, codec and domain size.
    pub fn connect(mut transport: T, codec: FixedPointCodec, cells: usize) -> Result<Self> {
        let mut msg = hello(&codec).to_vec();
        msg.push(cells as u64);
        for p in 0..3u8 {
            transport.send(p, MessageKind::Setup, msg.clone())?;
        }
        for p in 0..3u8 {
            let got = transport.recv(p, MessageKind::Setup)?;
            check_hello("coordinator", &format!("party {p}"), &codec, &got)?;
            if got.get(3) != Some(&(cells as u64)) {
                return Err(Error::protocol(format!(
                    "party {p} holds shares of {:?} cells, the schema defines {cells}",
                    got.get(3)
                )));
            }
        }
        Ok(Coordinator { transport, codec, queries: 0, reveals: Vec::new() })
    }

    /// Sends the workload; parties evaluate it on their shares once.
    pub fn load_workload(&mut self, workload: &[LinearQuery]) -> Result<()> {
        let cells = workload.first().map_or(0, |q| q.len());
        let mut msg = Vec::with_capacity(3 + workload.len() * cells);
        msg.extend([OP_WORKLOAD, workload.len() as u64, cells as u64]);
        for q in workload {
            msg.extend(q.coeffs().iter().map(|c| c.to_bits()));
        }
        self.broadcast(msg)?;
        self.queries = workload.len();
        Ok(())
    }

    /// Values revealed to the coordinator, by label and count.
    pub fn reveals(&self) -> &[(&'static str, usize)] {
        &self.reveals
    }

    pub fn shutdown(mut self) -> Result<TrafficStats> {
        self.broadcast(vec![OP_SHUTDOWN])?;
        Ok(self.transport.stats())
    }

    fn broadcast(&mut self, msg: Vec<u64>) -> Result<()> {
        for p in 0..3u8 {
            self.transport.send(p, MessageKind::Setup, msg.clone())?;
        }
        Ok(())
    }

    fn collect(&mut self, label: &'static str) -> Result<crate::ring::Ring> {
        let v = collect_opened(&mut self.transport, 1)?;
        self.reveals.push((label, 1));
        Ok(v[0])
    }
}

impl<T: Transport> MechanismBackend for Coordinator<T> {
    fn select(&mut self, approx: &[f64], eps_prime: f64) -> Result<usize> {
        if approx.len() != self.queries {
            return Err(Error::argument("approximate answers do not match the loaded workload"));
        }
        let mut msg = vec![OP_SELECT, eps_prime.to_bits()];
        msg.extend(approx.iter().map(|a| a.to_bits()));
        self.broadcast(msg)?;
        let k = self.collect(QEM_OPEN_LABEL)?;
        crate::dp::index_from_ring(k, self.queries)
    }

    fn measure(&mut self, index: usize, b: f64) -> Result<f64> {
        self.broadcast(vec![OP_MEASURE, index as u64, b.to_bits()])?;
        let m = self.collect(LAP_OPEN_LABEL)?;
        Ok(self.codec.decode(m))
    }
}

/// Setup of an in-process three-party cluster.
#[derive(Debug, Clone)]
pub struct ClusterOptions {
    pub codec: FixedPointCodec,
    /// Private seed of each party.
    pub seeds: [u64; 3],
    pub randomness: RandomSource,
    pub exec: Exec,
}

impl ClusterOptions {
    /// Parties seeded from the operating system.
    pub fn fresh(codec: FixedPointCodec) -> Self {
        let mut os = rand::rng();
        ClusterOptions { codec, seeds: std::array::from_fn(|_| os.next_u64()), randomness: RandomSource::Joint, exec: Exec::default() }
    }

    /// Deterministic party seeds (tests and pinned-tape runs).
    pub fn seeded(codec: FixedPointCodec, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(2);
        ClusterOptions { codec, seeds: std::array::from_fn(|_| rng.next_u64()), randomness: RandomSource::Joint, exec: Exec::default() }
    }
}

/// Starts three party threads on a channel mesh, hands a connected
/// coordinator to `drive`, then shuts the parties down.
pub fn with_local_cluster<R>(
    shares: [Vec<RepShare>; 3],
    opts: &ClusterOptions,
    drive: impl FnOnce(&mut Coordinator<MemoryTransport>) -> Result<R>,
) -> Result<(R, [ServeSummary; 3])> {
    let cells = shares[0].len();
    let mut mesh = memory_mesh(4);
    let coord_t = mesh.pop().expect("four endpoints");
    thread::scope(|scope| {
        let handles: Vec<_> = mesh
            .into_iter()
            .zip(shares)
            .zip(PartyId::all())
            .map(|((t, h), id)| {
                let config = PartyConfig { codec: opts.codec, local_seed: opts.seeds[id.index()], randomness: opts.randomness.clone() };
                let exec = opts.exec;
                scope.spawn(move || -> Result<ServeSummary> {
                    let mut party = establish(id, t, config)?;
                    serve(&mut party, &h, exec)
                })
            })
            .collect();

        let driven = Coordinator::connect(coord_t, opts.codec, cells).and_then(|mut c| {
            let r = drive(&mut c)?;
            c.shutdown()?;
            Ok(r)
        });
        let parties: Vec<Result<ServeSummary>> = handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::protocol("party thread panicked"))))
            .collect();
        // a party's own failure explains the coordinator's disconnect
        let mut summaries = Vec::with_capacity(3);
        let mut party_err = None;
        for p in parties {
            match p {
                Ok(s) => summaries.push(s),
                Err(e) => {
                    if party_err.is_none() || matches!(party_err, Some(Error::Communication(_))) {
                        party_err = Some(e);
                    }
                }
            }
        }
        match (driven, party_err) {
            (Ok(r), None) => Ok((r, summaries.try_into().unwrap_or_else(|_| unreachable!()))),
            (Err(Error::Communication(_)), Some(e)) => Err(e),
            (Err(e), _) => Err(e),
            (Ok(_), Some(e)) => Err(e),
        }
    })
}
