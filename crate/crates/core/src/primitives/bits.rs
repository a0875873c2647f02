//! Conversions between arithmetic and boolean sharings.
//!
//! Bit decomposition views the three arithmetic summands as three
//! boolean-shared words (each known to two parties, so no communication),
//! compresses them with one carry-save layer and adds the remaining two words
//! with a Kogge–Stone parallel-prefix adder: 1 + 1 + 6 AND rounds for 64 bits.

use crate::error::Result;
use crate::sharing::{BoolShare, Party, RepShare};
use crate::transport::Transport;

impl<T: Transport> Party<T> {
    /// Boolean sharing of the 64-bit two's-complement representation.
    pub fn bit_decompose(&mut self, x: &[RepShare]) -> Result<Vec<BoolShare>> {
        let n = x.len();
        // party i sees summand x_i as (x_i, 0), x_{i+1} as (0, x_{i+1}), x_{i+2} as (0, 0);
        // order them globally as s0, s1, s2.
        let slot = self.id().index();
        let summands: Vec<[BoolShare; 3]> = x
            .iter()
            .map(|s| {
                let mut w = [BoolShare::default(); 3];
                w[slot] = BoolShare::new(s.a.0, 0);
                w[(slot + 1) % 3] = BoolShare::new(0, s.b.0);
                w
            })
            .collect();

        // carry-save: sum = s0^s1^s2, carry = maj(s0,s1,s2) = s0&s1 ^ s2&(s0^s1)
        let mut lhs = Vec::with_capacity(2 * n);
        let mut rhs = Vec::with_capacity(2 * n);
        for w in &summands {
            lhs.push(w[0]);
            rhs.push(w[1]);
        }
        for w in &summands {
            lhs.push(w[2]);
            rhs.push(w[0].xor(w[1]));
        }
        let prods = self.and(&lhs, &rhs)?;
        let partial: Vec<BoolShare> = summands.iter().map(|w| w[0].xor(w[1]).xor(w[2])).collect();
        let carry: Vec<BoolShare> = (0..n).map(|k| prods[k].xor(prods[n + k]).shl(1)).collect();

        self.add_bits(&partial, &carry)
    }

    /// Two-operand addition of boolean-shared words (mod 2^64).
    pub fn add_bits(&mut self, x: &[BoolShare], y: &[BoolShare]) -> Result<Vec<BoolShare>> {
        let n = x.len();
        let p: Vec<BoolShare> = x.iter().zip(y).map(|(a, b)| a.xor(*b)).collect();
        let mut g = self.and(x, y)?;
        let mut pp = p.clone();
        let mut d = 1u32;
        while d < 64 {
            let last = d == 32;
            let mut lhs: Vec<BoolShare> = pp.clone();
            let mut rhs: Vec<BoolShare> = g.iter().map(|s| s.shl(d)).collect();
            if !last {
                lhs.extend_from_slice(&pp);
                rhs.extend(pp.iter().map(|s| s.shl(d)));
            }
            let out = self.and(&lhs, &rhs)?;
            for k in 0..n {
                g[k] = g[k].xor(out[k]);
            }
            if !last {
                pp = out[n..].to_vec();
            }
            d <<= 1;
        }
        // carry into bit j is the group generate of bits [0, j)
        Ok(p.iter().zip(&g).map(|(p, g)| p.xor(g.shl(1))).collect())
    }

    /// Sign bit (bit 63) of each value, in position 0.
    pub fn sign_bits(&mut self, x: &[RepShare]) -> Result<Vec<BoolShare>> {
        Ok(self.bit_decompose(x)?.into_iter().map(|b| b.shr(63)).collect())
    }

    /// Arithmetic sharing of bit 0 of each boolean sharing, via
    /// `a ⊕ b = a + b − 2ab` applied twice (two multiplication rounds).
    pub fn bits_to_arith(&mut self, bits: &[BoolShare]) -> Result<Vec<RepShare>> {
        use crate::ring::Ring;
        let slot = self.id().index();
        let summands: Vec<[RepShare; 3]> = bits
            .iter()
            .map(|s| {
                let mut w = [RepShare::ZERO; 3];
                w[slot] = RepShare::new(Ring(s.a & 1), Ring::ZERO);
                w[(slot + 1) % 3] = RepShare::new(Ring::ZERO, Ring(s.b & 1));
                w
            })
            .collect();
        let b0: Vec<RepShare> = summands.iter().map(|w| w[0]).collect();
        let b1: Vec<RepShare> = summands.iter().map(|w| w[1]).collect();
        let b2: Vec<RepShare> = summands.iter().map(|w| w[2]).collect();
        let two = Ring(2);
        let p01 = self.mul(&b0, &b1)?;
        let t: Vec<RepShare> =
            (0..bits.len()).map(|k| b0[k] + b1[k] - p01[k].mul_public(two)).collect();
        let p = self.mul(&t, &b2)?;
        Ok((0..bits.len()).map(|k| t[k] + b2[k] - p[k].mul_public(two)).collect())
    }

    /// Bitwise OR of boolean sharings.
    pub fn or_bits(&mut self, x: &[BoolShare], y: &[BoolShare]) -> Result<Vec<BoolShare>> {
        let both = self.and(x, y)?;
        Ok(x.iter().zip(y).zip(both).map(|((a, b), c)| a.xor(*b).xor(c)).collect())
    }
}
