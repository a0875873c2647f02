//! Arithmetic in Z_2^64 and the fixed-point codec used to carry reals through it.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Number of bits in a ring element.
pub const RING_BITS: u32 = 64;

/// An element of Z_2^64. All arithmetic wraps.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(transparent)]
pub struct Ring(pub u64);

impl Ring {
    pub const ZERO: Ring = Ring(0);
    pub const ONE: Ring = Ring(1);

    #[inline]
    pub fn from_signed(v: i64) -> Self {
        Ring(v as u64)
    }

    /// Two's-complement view.
    #[inline]
    pub fn signed(self) -> i64 {
        self.0 as i64
    }

    #[inline]
    pub fn shl(self, bits: u32) -> Self {
        Ring(self.0.wrapping_shl(bits))
    }

    /// Arithmetic shift right on the signed view (floor toward minus infinity).
    #[inline]
    pub fn sar(self, bits: u32) -> Self {
        Ring((self.signed() >> bits) as u64)
    }
}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ring({})", self.0)
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for Ring {
    fn from(v: u64) -> Self {
        Ring(v)
    }
}

impl Add for Ring {
    type Output = Ring;
    #[inline]
    fn add(self, rhs: Ring) -> Ring {
        Ring(self.0.wrapping_add(rhs.0))
    }
}

impl Sub for Ring {
    type Output = Ring;
    #[inline]
    fn sub(self, rhs: Ring) -> Ring {
        Ring(self.0.wrapping_sub(rhs.0))
    }
}

impl Mul for Ring {
    type Output = Ring;
    #[inline]
    fn mul(self, rhs: Ring) -> Ring {
        Ring(self.0.wrapping_mul(rhs.0))
    }
}

impl Neg for Ring {
    type Output = Ring;
    #[inline]
    fn neg(self) -> Ring {
        Ring(self.0.wrapping_neg())
    }
}

impl AddAssign for Ring {
    #[inline]
    fn add_assign(&mut self, rhs: Ring) {
        *self = *self + rhs;
    }
}

impl SubAssign for Ring {
    #[inline]
    fn sub_assign(&mut self, rhs: Ring) {
        *self = *self - rhs;
    }
}

impl Sum for Ring {
    fn sum<I: Iterator<Item = Ring>>(iter: I) -> Ring {
        iter.fold(Ring::ZERO, |a, b| a + b)
    }
}

/// Fixed-point encoding of reals into the ring: `x ↦ round(x · 2^f) mod 2^64`.
///
/// Products of two encoded values carry `2f` fractional bits until they are
/// truncated back, so a configuration must keep `|product| < 2^(63 − 2f)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedPointCodec {
    frac_bits: u32,
}

impl Default for FixedPointCodec {
    fn default() -> Self {
        FixedPointCodec { frac_bits: 16 }
    }
}

impl FixedPointCodec {
    pub fn new(frac_bits: u32) -> Result<Self> {
        if frac_bits == 0 || frac_bits > 31 {
            return Err(Error::Argument(format!(
                "fractional bits must be in 1..=31, got {frac_bits}"
            )));
        }
        Ok(FixedPointCodec { frac_bits })
    }

    /// Total word size (always 64).
    pub fn total_bits(&self) -> u32 {
        RING_BITS
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// Scale factor `2^f`.
    pub fn scale(&self) -> f64 {
        (1u64 << self.frac_bits) as f64
    }

    /// Smallest representable step `2^-f`.
    pub fn resolution(&self) -> f64 {
        1.0 / self.scale()
    }

    /// Exclusive upper bound on representable magnitudes, `2^(k − f − 1)`.
    pub fn bound(&self) -> f64 {
        2f64.powi((RING_BITS - self.frac_bits - 1) as i32)
    }

    pub fn encode(&self, x: f64) -> Result<Ring> {
        let bound = self.bound();
        if !x.is_finite() || x >= bound || x < -bound {
            return Err(Error::Range(format!(
                "{x} is outside the fixed-point range [-{bound}, {bound})"
            )));
        }
        Ok(self.encode_unchecked(x))
    }

    /// Encoding for values already known to be in range.
    #[inline]
    pub fn encode_unchecked(&self, x: f64) -> Ring {
        // f64::round is half-away-from-zero.
        Ring::from_signed((x * self.scale()).round() as i64)
    }

    /// Encodes with `2f` fractional bits, the layout of a raw fixed-point product.
    pub fn encode_double(&self, x: f64) -> Ring {
        let s = self.scale();
        Ring::from_signed((x * s * s).round() as i64)
    }

    #[inline]
    pub fn decode(&self, e: Ring) -> f64 {
        e.signed() as f64 / self.scale()
    }

    /// Rescales a raw product (2f fractional bits) back to f bits by an
    /// arithmetic shift, i.e. floor on the signed view.
    #[inline]
    pub fn trunc_plain(&self, e: Ring) -> Ring {
        e.sar(self.frac_bits)
    }

    /// Integer `v` encoded at this scale.
    pub fn encode_int(&self, v: i64) -> Ring {
        Ring::from_signed(v).shl(self.frac_bits)
    }
}

/// Picks the fractional precision for a public constant so that its encoding
/// keeps about 24 significant bits, never less than `f` nor more than `2f + 8`.
pub(crate) fn constant_precision(codec: &FixedPointCodec, c: f64) -> u32 {
    let f = codec.frac_bits();
    if c == 0.0 || !c.is_finite() {
        return f;
    }
    let exp = c.abs().log2().floor() as i32;
    let p = 23 - exp;
    p.clamp(f as i32, (2 * f + 8) as i32) as u32
}
