//! Pairwise pseudorandom streams for non-interactive zero sharings.
//!
//! Each adjacent pair of parties (i, i+1) shares a 128-bit key. The stream for
//! a key is ChaCha12 keyed by it; element `c` of the stream is the PRF value at
//! counter `c`, so sequential draws and random access agree.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::PartyId;
use crate::ring::Ring;

pub type PrfKey = [u8; 16];

const DOMAIN: &[u8; 16] = b"mwem-mpc/prf/v1\0";

fn seed(key: &PrfKey) -> [u8; 32] {
    let mut s = [0u8; 32];
    s[..16].copy_from_slice(key);
    s[16..].copy_from_slice(DOMAIN);
    s
}

/// A keyed stream with a position counter.
#[derive(Clone)]
pub struct PrfStream {
    key: PrfKey,
    rng: ChaCha12Rng,
    counter: u64,
}

impl PrfStream {
    pub fn new(key: PrfKey) -> Self {
        PrfStream { key, rng: ChaCha12Rng::from_seed(seed(&key)), counter: 0 }
    }

    /// PRF value at an arbitrary counter; does not move the stream.
    pub fn eval(&self, counter: u64) -> u64 {
        let mut rng = ChaCha12Rng::from_seed(seed(&self.key));
        rng.set_word_pos(counter as u128 * 2);
        rng.next_u64()
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        self.rng.next_u64()
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }
}

/// The two keys a party holds: shared with its successor and predecessor.
#[derive(Clone)]
pub struct PrfKeys {
    pub(crate) next: PrfStream,
    pub(crate) prev: PrfStream,
}

impl PrfKeys {
    /// `pair_keys[i]` is the key of pair (i, i+1).
    pub fn for_party(id: PartyId, pair_keys: &[PrfKey; 3]) -> Self {
        PrfKeys {
            next: PrfStream::new(pair_keys[id.index()]),
            prev: PrfStream::new(pair_keys[id.prev().index()]),
        }
    }

    /// This party's component of the additive zero sharing at `counter`:
    /// `u_i = F(k_{i,i+1}, c) − F(k_{i−1,i}, c)`. The three components sum to zero.
    pub fn zero_share_at(&self, counter: u64) -> Ring {
        Ring(self.next.eval(counter)) - Ring(self.prev.eval(counter))
    }

    /// Next additive zero-sharing component.
    #[inline]
    pub fn zero_ring(&mut self) -> Ring {
        Ring(self.next.next_u64()) - Ring(self.prev.next_u64())
    }

    /// Next XOR zero-sharing component (64 independent bit positions).
    #[inline]
    pub fn zero_bits(&mut self) -> u64 {
        self.next.next_u64() ^ self.prev.next_u64()
    }
}
