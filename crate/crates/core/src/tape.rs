//! Deterministic randomness tape for cross-mode testing.
//!
//! A tape replaces the joint uniform draws and random bits of the
//! mechanisms (and the plaintext sampler's uniforms) with a fixed sequence,
//! so that the plaintext and secret-shared runs consume identical
//! randomness. Using a tape makes the noise public: it exists only behind
//! the `pinned-tape` feature and must never be used for a real release.
//!
//! File format: either one unsigned 64-bit integer per line, or a single
//! line `seed <n>` for an unbounded ChaCha8 stream. `#` starts a comment.

use std::fs;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum Source {
    Words(Vec<u64>),
    Stream(ChaCha8Rng),
}

#[derive(Debug, Clone)]
pub struct Tape {
    source: Source,
    pos: usize,
    seed: Option<u64>,
}

impl Tape {
    pub fn from_seed(seed: u64) -> Self {
        Tape { source: Source::Stream(ChaCha8Rng::seed_from_u64(seed)), pos: 0, seed: Some(seed) }
    }

    pub fn from_words(words: Vec<u64>) -> Self {
        Tape { source: Source::Words(words), pos: 0, seed: None }
    }

    /// Seed of a streamed tape; `None` for an explicit word list.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .collect();
        if let [single] = lines.as_slice() {
            if let Some(rest) = single.strip_prefix("seed") {
                let seed = rest.trim().parse::<u64>().map_err(|e| Error::Format(format!("tape seed: {e}")))?;
                return Ok(Tape::from_seed(seed));
            }
        }
        let words = lines
            .iter()
            .enumerate()
            .map(|(i, l)| l.parse::<u64>().map_err(|e| Error::Format(format!("tape line {}: {e}", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Tape::from_words(words))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("cannot read tape {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn next_word(&mut self) -> Result<u64> {
        let w = match &mut self.source {
            Source::Words(w) => *w
                .get(self.pos)
                .ok_or_else(|| Error::Data(format!("randomness tape exhausted after {} words", self.pos)))?,
            Source::Stream(rng) => rng.next_u64(),
        };
        self.pos += 1;
        Ok(w)
    }

    /// A uniform value on `{0, …, 2^bits − 1}`.
    pub fn uniform_raw(&mut self, bits: u32) -> Result<u64> {
        Ok(self.next_word()? & ((1u64 << bits) - 1))
    }

    pub fn bit(&mut self) -> Result<u64> {
        Ok(self.next_word()? & 1)
    }
}
