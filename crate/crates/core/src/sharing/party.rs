//! The per-party protocol engine: local state plus the interactive building
//! blocks (multiplication, AND, truncation, input sharing, opening).
//!
//! Every method here is called by all three parties in the same order with
//! operands of the same length. Messages always flow around the ring, so each
//! party talks to its predecessor and successor only.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::{BoolShare, PartyId, PrfKeys, RepShare};
use crate::error::{Error, Result};
use crate::ring::{constant_precision, FixedPointCodec, Ring};
#[cfg(feature = "pinned-tape")]
use crate::tape::Tape;
use crate::transport::{MessageKind, TrafficStats, Transport, COORDINATOR};

/// Where joint randomness (uniform draws, random bits) comes from.
#[derive(Debug, Clone, Default)]
pub enum RandomSource {
    /// Every party contributes private randomness; nobody learns the result.
    #[default]
    Joint,
    /// Values are read from a tape every party holds. Test use only: this
    /// makes the mechanisms' randomness public and voids the privacy guarantee.
    #[cfg(feature = "pinned-tape")]
    Tape(Tape),
}

#[derive(Debug, Clone)]
pub struct PartyConfig {
    pub codec: FixedPointCodec,
    /// Seed for this party's private randomness.
    pub local_seed: u64,
    pub randomness: RandomSource,
}

impl Default for PartyConfig {
    fn default() -> Self {
        PartyConfig { codec: FixedPointCodec::default(), local_seed: rand::rng().next_u64(), randomness: RandomSource::Joint }
    }
}

/// One opening performed by this party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenRecord {
    pub label: &'static str,
    pub count: usize,
    /// `true` when the values were revealed to the coordinator only.
    pub to_coordinator: bool,
}

pub struct Party<T: Transport> {
    id: PartyId,
    codec: FixedPointCodec,
    transport: T,
    prf: PrfKeys,
    rng: ChaCha12Rng,
    pub(crate) randomness: RandomSource,
    opens: Vec<OpenRecord>,
}

impl<T: Transport> Party<T> {
    pub fn new(id: PartyId, transport: T, prf: PrfKeys, config: PartyConfig) -> Self {
        debug_assert_eq!(transport.node(), id.raw());
        Party {
            id,
            codec: config.codec,
            transport,
            prf,
            rng: ChaCha12Rng::seed_from_u64(config.local_seed),
            randomness: config.randomness,
            opens: Vec::new(),
        }
    }

    pub fn id(&self) -> PartyId {
        self.id
    }

    pub fn codec(&self) -> FixedPointCodec {
        self.codec
    }

    pub fn stats(&self) -> TrafficStats {
        self.transport.stats()
    }

    /// Every opening this party has taken part in, in order.
    pub fn open_log(&self) -> &[OpenRecord] {
        &self.opens
    }

    pub fn transport_mut(&mut self) -> &mut T {
        &mut self.transport
    }

    pub fn randomness(&self) -> &RandomSource {
        &self.randomness
    }

    // ---- local operations -------------------------------------------------

    pub fn public(&self, v: Ring) -> RepShare {
        RepShare::public(self.id, v)
    }

    pub fn public_fixed(&self, x: f64) -> Result<RepShare> {
        Ok(self.public(self.codec.encode(x)?))
    }

    pub fn add_public(&self, x: RepShare, v: Ring) -> RepShare {
        x.add_public(self.id, v)
    }

    pub fn public_bits(&self, v: u64) -> BoolShare {
        BoolShare::public(self.id, v)
    }

    // ---- messaging helpers ------------------------------------------------

    fn send_to(&mut self, to: PartyId, payload: Vec<u64>) -> Result<()> {
        self.transport.send(to.raw(), MessageKind::Data, payload)
    }

    fn recv_from(&mut self, from: PartyId, len: usize) -> Result<Vec<u64>> {
        let got = self.transport.recv(from.raw(), MessageKind::Data)?;
        if got.len() != len {
            return Err(Error::protocol(format!(
                "party {} expected {len} elements from party {from}, got {}",
                self.id,
                got.len()
            )));
        }
        Ok(got)
    }

    /// Sends to the predecessor and receives the successor's message.
    fn pass_back(&mut self, out: Vec<u64>) -> Result<Vec<u64>> {
        let n = out.len();
        self.send_to(self.id.prev(), out)?;
        self.recv_from(self.id.next(), n)
    }

    // ---- multiplication ---------------------------------------------------

    /// Element-wise product of two sharings (no rescaling). One ring element
    /// per product is sent by each party.
    pub fn mul(&mut self, x: &[RepShare], y: &[RepShare]) -> Result<Vec<RepShare>> {
        if x.len() != y.len() {
            return Err(Error::argument(format!("mul operand lengths {} and {}", x.len(), y.len())));
        }
        let v: Vec<Ring> = x
            .iter()
            .zip(y)
            .map(|(x, y)| x.a * y.a + x.a * y.b + x.b * y.a + self.prf.zero_ring())
            .collect();
        let from_next = self.pass_back(v.iter().map(|r| r.0).collect())?;
        Ok(v.into_iter().zip(from_next).map(|(mine, theirs)| RepShare::new(mine, Ring(theirs))).collect())
    }

    pub fn mul_one(&mut self, x: RepShare, y: RepShare) -> Result<RepShare> {
        Ok(self.mul(&[x], &[y])?[0])
    }

    /// Fixed-point product: multiply, then drop `f` fractional bits.
    pub fn mul_fixed(&mut self, x: &[RepShare], y: &[RepShare]) -> Result<Vec<RepShare>> {
        let raw = self.mul(x, y)?;
        self.trunc(&raw, self.codec.frac_bits())
    }

    /// Multiplies fixed-point sharings by a public real. The constant is
    /// encoded with extra precision when it is small, then truncated away.
    pub fn mul_public_fixed(&mut self, x: &[RepShare], c: f64) -> Result<Vec<RepShare>> {
        let p = constant_precision(&self.codec, c);
        let c_raw = Ring::from_signed((c * 2f64.powi(p as i32)).round() as i64);
        let raw: Vec<RepShare> = x.iter().map(|s| s.mul_public(c_raw)).collect();
        self.trunc(&raw, p)
    }

    /// Bitwise AND of boolean sharings.
    pub fn and(&mut self, x: &[BoolShare], y: &[BoolShare]) -> Result<Vec<BoolShare>> {
        if x.len() != y.len() {
            return Err(Error::argument(format!("and operand lengths {} and {}", x.len(), y.len())));
        }
        let v: Vec<u64> = x
            .iter()
            .zip(y)
            .map(|(x, y)| (x.a & y.a) ^ (x.a & y.b) ^ (x.b & y.a) ^ self.prf.zero_bits())
            .collect();
        let from_next = self.pass_back(v.clone())?;
        Ok(v.into_iter().zip(from_next).map(|(a, b)| BoolShare::new(a, b)).collect())
    }

    // ---- truncation -------------------------------------------------------

    /// Divides by `2^bits` (floor on the signed view, off by at most one unit).
    ///
    /// The sharing is first collapsed to two summands `A + B`, where `A` is a
    /// fresh value uniform on `[0, 2^62)` known to parties 0 and 1 and
    /// `B = x − A` is assembled by party 2. Each summand is shifted locally
    /// and the result re-shared. Requires `|x| < 2^62`; `B` hides `x` up to
    /// statistical distance `|x| / 2^62`.
    pub fn trunc(&mut self, x: &[RepShare], bits: u32) -> Result<Vec<RepShare>> {
        let n = x.len();
        match self.id.raw() {
            0 => {
                let masks: Vec<Ring> = (0..n).map(|_| Ring(self.prf.next.next_u64() >> 2)).collect();
                let msg = x.iter().zip(&masks).map(|(s, m)| (s.b - *m).0).collect();
                self.send_to(self.id.prev(), msg)?;
                Ok(masks
                    .into_iter()
                    .map(|m| {
                        let r = Ring(self.prf.prev.next_u64());
                        RepShare::new(r, Ring(m.0 >> bits))
                    })
                    .collect())
            }
            1 => {
                let masks: Vec<Ring> = (0..n).map(|_| Ring(self.prf.prev.next_u64() >> 2)).collect();
                let y2 = self.recv_from(self.id.next(), n)?;
                Ok(masks.into_iter().zip(y2).map(|(m, y)| RepShare::new(Ring(m.0 >> bits), Ring(y))).collect())
            }
            _ => {
                let partial = self.recv_from(self.id.next(), n)?;
                let mut shares = Vec::with_capacity(n);
                let mut msg = Vec::with_capacity(n);
                for (s, p) in x.iter().zip(partial) {
                    let big_b = (s.a + s.b + Ring(p)).sar(bits);
                    let r = Ring(self.prf.next.next_u64());
                    let y2 = big_b - r;
                    msg.push(y2.0);
                    shares.push(RepShare::new(y2, r));
                }
                self.send_to(self.id.prev(), msg)?;
                Ok(shares)
            }
        }
    }

    // ---- input sharing ----------------------------------------------------

    /// Every party shares `mine` (same length everywhere) in one round.
    /// Returns the sharings indexed by owner.
    pub fn input_all(&mut self, mine: &[Ring]) -> Result<[Vec<RepShare>; 3]> {
        let n = mine.len();
        // as owner: x_own = R (prev key), x_{own+1} = v − R, x_{own+2} = 0
        let own_masks: Vec<Ring> = (0..n).map(|_| Ring(self.prf.prev.next_u64())).collect();
        // for the successor's input this party holds (0, R) with R from the next key
        let next_masks: Vec<Ring> = (0..n).map(|_| Ring(self.prf.next.next_u64())).collect();
        let masked: Vec<u64> = mine.iter().zip(&own_masks).map(|(v, r)| (*v - *r).0).collect();
        self.send_to(self.id.next(), masked.clone())?;
        let from_prev = self.recv_from(self.id.prev(), n)?;

        let own = own_masks.iter().zip(&masked).map(|(r, m)| RepShare::new(*r, Ring(*m))).collect();
        let of_next = next_masks.into_iter().map(|r| RepShare::new(Ring::ZERO, r)).collect();
        let of_prev = from_prev.into_iter().map(|m| RepShare::new(Ring(m), Ring::ZERO)).collect();

        let mut out: [Vec<RepShare>; 3] = Default::default();
        out[self.id.index()] = own;
        out[self.id.next().index()] = of_next;
        out[self.id.prev().index()] = of_prev;
        Ok(out)
    }

    // ---- opening ----------------------------------------------------------

    /// Reveals the secrets to all three parties. Each party forwards its first
    /// component to its successor and its second to its predecessor, then
    /// checks that both copies of its missing component agree.
    pub fn open(&mut self, label: &'static str, x: &[RepShare]) -> Result<Vec<Ring>> {
        let n = x.len();
        self.opens.push(OpenRecord { label, count: n, to_coordinator: false });
        let firsts = x.iter().map(|s| s.a.0).collect();
        let seconds = x.iter().map(|s| s.b.0).collect();
        self.transport.send(self.id.next().raw(), MessageKind::Open, firsts)?;
        self.transport.send(self.id.prev().raw(), MessageKind::Open, seconds)?;
        let from_prev = self.transport.recv(self.id.prev().raw(), MessageKind::Open)?;
        let from_next = self.transport.recv(self.id.next().raw(), MessageKind::Open)?;
        if from_prev.len() != n || from_next.len() != n {
            return Err(Error::protocol("open: wrong number of components"));
        }
        x.iter()
            .zip(from_prev.iter().zip(&from_next))
            .map(|(s, (p, q))| {
                if p != q {
                    Err(Error::Consistency(format!("party {} received mismatching components", self.id)))
                } else {
                    Ok(s.a + s.b + Ring(*p))
                }
            })
            .collect()
    }

    /// Sends this party's view to the coordinator, which reconstructs.
    pub fn open_to_coordinator(&mut self, label: &'static str, x: &[RepShare]) -> Result<()> {
        self.opens.push(OpenRecord { label, count: x.len(), to_coordinator: true });
        let payload = x.iter().flat_map(|s| [s.a.0, s.b.0]).collect();
        self.transport.send(COORDINATOR, MessageKind::Open, payload)
    }

    /// Reveals boolean sharings to all parties (testing and diagnostics).
    pub fn open_bits(&mut self, label: &'static str, x: &[BoolShare]) -> Result<Vec<u64>> {
        let as_ring: Vec<RepShare> = x.iter().map(|s| RepShare::new(Ring(s.a), Ring(s.b))).collect();
        let n = x.len();
        self.opens.push(OpenRecord { label, count: n, to_coordinator: false });
        let firsts = as_ring.iter().map(|s| s.a.0).collect();
        let seconds = as_ring.iter().map(|s| s.b.0).collect();
        self.transport.send(self.id.next().raw(), MessageKind::Open, firsts)?;
        self.transport.send(self.id.prev().raw(), MessageKind::Open, seconds)?;
        let from_prev = self.transport.recv(self.id.prev().raw(), MessageKind::Open)?;
        let from_next = self.transport.recv(self.id.next().raw(), MessageKind::Open)?;
        x.iter()
            .zip(from_prev.iter().zip(&from_next))
            .map(|(s, (p, q))| {
                if p != q {
                    Err(Error::Consistency("boolean open mismatch".into()))
                } else {
                    Ok(s.a ^ s.b ^ p)
                }
            })
            .collect()
    }

    /// Fresh private random words for this party's own contributions.
    pub(crate) fn local_words(&mut self, n: usize) -> Vec<u64> {
        (0..n).map(|_| self.rng.next_u64()).collect()
    }
}

/// Coordinator-side reconstruction of values opened with
/// [`Party::open_to_coordinator`].
pub fn collect_opened<T: Transport>(transport: &mut T, count: usize) -> Result<Vec<Ring>> {
    let mut views: Vec<Vec<u64>> = Vec::with_capacity(3);
    for p in 0..3u8 {
        let v = transport.recv(p, MessageKind::Open)?;
        if v.len() != 2 * count {
            return Err(Error::protocol(format!(
                "party {p} opened {} components, expected {}",
                v.len(),
                2 * count
            )));
        }
        views.push(v);
    }
    (0..count)
        .map(|k| {
            let s: [RepShare; 3] =
                std::array::from_fn(|p| RepShare::new(Ring(views[p][2 * k]), Ring(views[p][2 * k + 1])));
            super::reconstruct(&s)
        })
        .collect()
}
