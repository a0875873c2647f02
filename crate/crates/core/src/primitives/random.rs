use crate::error::Result;
use crate::ring::Ring;
#[cfg(feature = "pinned-tape")]
use crate::sharing::RandomSource;
use crate::sharing::{Party, RepShare};
use crate::transport::Transport;

impl<T: Transport> Party<T> {
    /// `n` uniformly random shared bits. Each party inputs a private bit per
    /// output and the three are folded with `a ⊕ b = a + b − 2ab`, so the
    /// result stays uniform as long as any one party's bit is.
    pub fn random_bits(&mut self, n: usize) -> Result<Vec<RepShare>> {
        #[cfg(feature = "pinned-tape")]
        if let RandomSource::Tape(tape) = &mut self.randomness {
            let bits = (0..n).map(|_| tape.bit()).collect::<Result<Vec<u64>>>()?;
            return Ok(bits.into_iter().map(|b| self.public(Ring(b))).collect());
        }
        let mine: Vec<Ring> = self.local_words(n).into_iter().map(|w| Ring(w & 1)).collect();
        let [b0, b1, b2] = self.input_all(&mine)?;
        let two = Ring(2);
        let p = self.mul(&b0, &b1)?;
        let t: Vec<RepShare> = (0..n).map(|k| b0[k] + b1[k] - p[k].mul_public(two)).collect();
        let p = self.mul(&t, &b2)?;
        Ok((0..n).map(|k| t[k] + b2[k] - p[k].mul_public(two)).collect())
    }

    /// `n` fixed-point values uniform on `{0, 2^−f, …, 1 − 2^−f}`, each the
    /// sum of `f` shared random bits at weights `2^−1 … 2^−f`.
    pub fn random_fixed(&mut self, n: usize) -> Result<Vec<RepShare>> {
        let f = self.codec().frac_bits();
        #[cfg(feature = "pinned-tape")]
        if let RandomSource::Tape(tape) = &mut self.randomness {
            let raw = (0..n).map(|_| tape.uniform_raw(f)).collect::<Result<Vec<u64>>>()?;
            return Ok(raw.into_iter().map(|r| self.public(Ring(r))).collect());
        }
        let bits = self.random_bits(n * f as usize)?;
        Ok(bits
            .chunks_exact(f as usize)
            .map(|c| c.iter().enumerate().fold(RepShare::ZERO, |acc, (j, b)| acc + b.mul_public(Ring(1 << j))))
            .collect())
    }
}
