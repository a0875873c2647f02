//! In-process simulation: three parties on threads joined by a channel mesh.

use std::thread;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::ring::FixedPointCodec;
use crate::sharing::{Party, PartyConfig, PartyId, PrfKey, PrfKeys, RandomSource};
use crate::transport::{memory_mesh, MemoryTransport};

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub codec: FixedPointCodec,
    /// Derives the pairwise PRF keys and each party's private seed.
    pub seed: u64,
    pub randomness: RandomSource,
}

impl SimOptions {
    pub fn seeded(seed: u64) -> Self {
        SimOptions { codec: FixedPointCodec::default(), seed, randomness: RandomSource::Joint }
    }

    pub fn with_codec(mut self, codec: FixedPointCodec) -> Self {
        self.codec = codec;
        self
    }

    pub fn with_randomness(mut self, randomness: RandomSource) -> Self {
        self.randomness = randomness;
        self
    }

    /// Pairwise keys and per-party configuration derived from the seed.
    pub fn party_setup(&self, id: PartyId) -> (PrfKeys, PartyConfig) {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        let mut keys = [PrfKey::default(); 3];
        for k in keys.iter_mut() {
            rng.fill_bytes(k);
        }
        let seeds: [u64; 3] = std::array::from_fn(|_| rng.next_u64());
        let config = PartyConfig {
            codec: self.codec,
            local_seed: seeds[id.index()],
            randomness: self.randomness.clone(),
        };
        (PrfKeys::for_party(id, &keys), config)
    }

    /// Three parties wired to the first three endpoints of `mesh`.
    pub fn parties(&self, mesh: Vec<MemoryTransport>) -> Vec<Party<MemoryTransport>> {
        mesh.into_iter()
            .take(3)
            .zip(PartyId::all())
            .map(|(t, id)| {
                let (keys, config) = self.party_setup(id);
                Party::new(id, t, keys, config)
            })
            .collect()
    }
}

/// Runs `f` once per party on its own thread and returns the three results
/// in party order. A party that fails drops its links, so its peers fail too
/// instead of blocking.
pub fn run_three<R, F>(opts: &SimOptions, f: F) -> Result<[R; 3]>
where
    R: Send,
    F: Fn(&mut Party<MemoryTransport>) -> Result<R> + Sync,
{
    let parties = opts.parties(memory_mesh(3));
    let f = &f;
    let results: Vec<Result<R>> = thread::scope(|scope| {
        let handles: Vec<_> = parties
            .into_iter()
            .map(|mut p| scope.spawn(move || f(&mut p)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::protocol("party thread panicked"))))
            .collect()
    });
    // report the root cause rather than a peer's disconnect
    let mut first_err = None;
    let mut ok = Vec::with_capacity(3);
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                let replace = match (&first_err, &e) {
                    (None, _) => true,
                    (Some(Error::Communication(_)), e) => !matches!(e, Error::Communication(_)),
                    _ => false,
                };
                if replace {
                    first_err = Some(e);
                }
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    Ok(ok.try_into().unwrap_or_else(|_| unreachable!()))
}
