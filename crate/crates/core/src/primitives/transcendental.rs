//! Exponential and natural logarithm over fixed-point shares.
//!
//! `exp(x)` is evaluated as `2^(−y)` with `y = −x·log2(e)`: the product is
//! formed at extra precision without truncation, bit-decomposed, and split
//! into an integer part (five bits, each selecting a public factor
//! `2^(−2^k)`) and a fractional part fed to a polynomial for `2^(−ψ)`.
//!
//! `ln(x)` locates the most significant set bit obliviously, scales `x` into
//! `[1, 2)` and evaluates a polynomial for `ln(1 + t)`, adding back the
//! exponent times `ln 2`.

use crate::error::Result;
use crate::ring::Ring;
use crate::sharing::{BoolShare, Party, RepShare};
use crate::transport::Transport;

/// `2^(−ψ)` on `[0, 1]`, lowest degree first (max error 5.5e-8).
pub const EXP2_NEG_COEFFS: [f64; 6] =
    [9.99999945e-01, -6.93143202e-01, 2.40179489e-01, -5.52996071e-02, 9.21087556e-03, -9.47553645e-04];

/// `ln(1 + t)` on `[0, 1]`, lowest degree first (max error 1.5e-6).
pub const LN1P_COEFFS: [f64; 7] =
    [1.47206501e-06, 9.99847697e-01, -4.97373216e-01, 3.15747317e-01, -1.90354337e-01, 8.26912371e-02, -1.74140775e-02];

/// Fractional bits of the intermediate `x·log2(e)` product.
const EXP_WIDE_BITS: u32 = 40;
/// Inputs below this are clamped to an output of 0.
pub(crate) const EXP_CLAMP: i64 = -16;
/// Integer-part bits of `y`; `y ≤ 16·log2(e) < 32` on the unclamped domain.
const EXP_INT_BITS: u32 = 5;

impl<T: Transport> Party<T> {
    /// `e^x` for fixed-point `x ≤ 0`; 0 below −16.
    pub fn exp(&mut self, x: &[RepShare]) -> Result<Vec<RepShare>> {
        let n = x.len();
        let codec = self.codec();
        let f = codec.frac_bits();
        let q = EXP_WIDE_BITS - f;
        let log2e = Ring::from_signed((std::f64::consts::LOG2_E * 2f64.powi(q as i32)).round() as i64);

        // y at 40 fractional bits, and x − (−16) for the clamp test
        let mut wide: Vec<RepShare> = x.iter().map(|s| (-*s).mul_public(log2e)).collect();
        wide.extend(x.iter().map(|s| self.add_public(*s, -codec.encode_int(EXP_CLAMP))));
        let bits = self.bit_decompose(&wide)?;

        // per value: f fraction bits, EXP_INT_BITS integer bits, then the clamp sign
        let per = (f + EXP_INT_BITS) as usize + 1;
        let mut picked: Vec<BoolShare> = Vec::with_capacity(n * per);
        for k in 0..n {
            for j in 0..f + EXP_INT_BITS {
                picked.push(bits[k].shr(EXP_WIDE_BITS - f + j));
            }
            picked.push(bits[n + k].shr(63));
        }
        let arith = self.bits_to_arith(&picked)?;

        let mut psi = Vec::with_capacity(n);
        let mut factors: Vec<Vec<RepShare>> = vec![Vec::with_capacity(n); EXP_INT_BITS as usize];
        let mut keep = Vec::with_capacity(n);
        let one = codec.encode_int(1);
        for k in 0..n {
            let b = &arith[k * per..(k + 1) * per];
            psi.push((0..f as usize).fold(RepShare::ZERO, |acc, j| acc + b[j].mul_public(Ring(1 << j))));
            for (i, fac) in factors.iter_mut().enumerate() {
                let c = codec.encode_unchecked(2f64.powi(-(1 << i)) - 1.0);
                fac.push(self.add_public(b[f as usize + i].mul_public(c), one));
            }
            keep.push(self.add_public(-b[per - 1], Ring::ONE));
        }

        let mut terms = vec![self.horner(&psi, &EXP2_NEG_COEFFS)?];
        terms.extend(factors);
        let prod = self.product_fixed(terms)?;
        self.mul(&keep, &prod)
    }

    /// `ln(x)` for fixed-point `x ∈ [2^−f, 1]`.
    pub fn ln(&mut self, x: &[RepShare]) -> Result<Vec<RepShare>> {
        let n = x.len();
        let codec = self.codec();
        let f = codec.frac_bits();
        let width = f + 1;
        let mask = (1u64 << width) - 1;

        let bits: Vec<BoolShare> = self.bit_decompose(x)?.into_iter().map(|b| b.mask(mask)).collect();
        // smear the leading one downwards, then isolate it
        let mut o = bits;
        let mut s = 1;
        while s < width {
            let shifted: Vec<BoolShare> = o.iter().map(|b| b.shr(s)).collect();
            o = self.or_bits(&o, &shifted)?;
            s <<= 1;
        }
        let mut onehot = Vec::with_capacity(n * width as usize);
        for b in &o {
            let h = b.xor(b.shr(1));
            onehot.extend((0..width).map(|j| h.shr(j)));
        }
        let h = self.bits_to_arith(&onehot)?;

        // x = 2^(j−f)·m with m = x·2^(f−j) ∈ [1, 2)
        let ln2 = std::f64::consts::LN_2;
        let mut scale = Vec::with_capacity(n);
        let mut log_exp = Vec::with_capacity(n);
        for k in 0..n {
            let hk = &h[k * width as usize..(k + 1) * width as usize];
            let mut w = RepShare::ZERO;
            let mut e = RepShare::ZERO;
            for j in 0..width {
                w += hk[j as usize].mul_public(Ring(1 << (f - j)));
                e += hk[j as usize].mul_public(codec.encode_unchecked((j as f64 - f as f64) * ln2));
            }
            scale.push(w);
            log_exp.push(e);
        }
        let m = self.mul(x, &scale)?;
        let t: Vec<RepShare> = m.iter().map(|s| self.add_public(*s, -codec.encode_int(1))).collect();
        let poly = self.horner(&t, &LN1P_COEFFS)?;
        Ok(poly.into_iter().zip(log_exp).map(|(p, e)| p + e).collect())
    }

    /// `Σ c_i·x^i` by Horner's rule with fixed-point products.
    pub(crate) fn horner(&mut self, x: &[RepShare], coeffs: &[f64]) -> Result<Vec<RepShare>> {
        let codec = self.codec();
        let top = codec.encode_unchecked(coeffs[coeffs.len() - 1]);
        let mut acc: Vec<RepShare> = x.iter().map(|_| self.public(top)).collect();
        for &c in coeffs.iter().rev().skip(1) {
            let c = codec.encode_unchecked(c);
            acc = self.mul_fixed(&acc, x)?.into_iter().map(|s| self.add_public(s, c)).collect();
        }
        Ok(acc)
    }

    /// Element-wise product of several fixed-point vectors, pairing them up
    /// in a tree so each layer is one batched multiplication.
    pub(crate) fn product_fixed(&mut self, mut terms: Vec<Vec<RepShare>>) -> Result<Vec<RepShare>> {
        while terms.len() > 1 {
            let n = terms[0].len();
            let pairs = terms.len() / 2;
            let (mut l, mut r) = (Vec::with_capacity(pairs * n), Vec::with_capacity(pairs * n));
            for p in 0..pairs {
                l.extend_from_slice(&terms[2 * p]);
                r.extend_from_slice(&terms[2 * p + 1]);
            }
            let prod = self.mul_fixed(&l, &r)?;
            let odd = (terms.len() % 2 == 1).then(|| terms.pop().unwrap());
            terms = prod.chunks(n).map(|c| c.to_vec()).collect();
            terms.extend(odd);
        }
        Ok(terms.pop().unwrap_or_default())
    }
}
