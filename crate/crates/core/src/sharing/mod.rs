//! Three-party replicated secret sharing over Z_2^64 (passive security).
//!
//! A secret `x = x_0 + x_1 + x_2` is held as pairs: party `i` holds
//! `(x_i, x_{i+1})`, indices mod 3. Public constants are added to the
//! summand `x_0`, held by parties 0 (first slot) and 2 (second slot).

mod party;
mod prf;

pub use party::{collect_opened, OpenRecord, Party, PartyConfig, RandomSource};
pub use prf::{PrfKey, PrfKeys, PrfStream};

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use rand::Rng;

use crate::error::{Error, Result};
use crate::ring::Ring;

/// One of the three computing parties.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartyId(u8);

impl PartyId {
    pub fn new(id: u8) -> Result<Self> {
        if id < 3 {
            Ok(PartyId(id))
        } else {
            Err(Error::argument(format!("party id must be 0, 1 or 2, got {id}")))
        }
    }

    pub fn all() -> [PartyId; 3] {
        [PartyId(0), PartyId(1), PartyId(2)]
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn raw(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn next(self) -> PartyId {
        PartyId((self.0 + 1) % 3)
    }

    #[inline]
    pub fn prev(self) -> PartyId {
        PartyId((self.0 + 2) % 3)
    }
}

impl fmt::Debug for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A party's view of an arithmetic sharing: `(x_i, x_{i+1})`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RepShare {
    pub a: Ring,
    pub b: Ring,
}

impl RepShare {
    pub const ZERO: RepShare = RepShare { a: Ring::ZERO, b: Ring::ZERO };

    pub fn new(a: Ring, b: Ring) -> Self {
        RepShare { a, b }
    }

    /// Trivial sharing of a public value (`x_0 = v`).
    pub fn public(id: PartyId, v: Ring) -> Self {
        match id.0 {
            0 => RepShare::new(v, Ring::ZERO),
            2 => RepShare::new(Ring::ZERO, v),
            _ => RepShare::ZERO,
        }
    }

    pub fn add_public(self, id: PartyId, v: Ring) -> Self {
        self + RepShare::public(id, v)
    }

    pub fn mul_public(self, c: Ring) -> Self {
        RepShare::new(self.a * c, self.b * c)
    }
}

impl Add for RepShare {
    type Output = RepShare;
    #[inline]
    fn add(self, rhs: RepShare) -> RepShare {
        RepShare::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl AddAssign for RepShare {
    #[inline]
    fn add_assign(&mut self, rhs: RepShare) {
        *self = *self + rhs;
    }
}

impl Sub for RepShare {
    type Output = RepShare;
    #[inline]
    fn sub(self, rhs: RepShare) -> RepShare {
        RepShare::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl Neg for RepShare {
    type Output = RepShare;
    #[inline]
    fn neg(self) -> RepShare {
        RepShare::new(-self.a, -self.b)
    }
}

/// A party's view of a boolean (XOR) sharing of a 64-bit word.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BoolShare {
    pub a: u64,
    pub b: u64,
}

impl BoolShare {
    pub fn new(a: u64, b: u64) -> Self {
        BoolShare { a, b }
    }

    pub fn public(id: PartyId, v: u64) -> Self {
        match id.0 {
            0 => BoolShare::new(v, 0),
            2 => BoolShare::new(0, v),
            _ => BoolShare::default(),
        }
    }

    #[inline]
    pub fn xor(self, o: BoolShare) -> BoolShare {
        BoolShare::new(self.a ^ o.a, self.b ^ o.b)
    }

    #[inline]
    pub fn xor_public(self, id: PartyId, v: u64) -> BoolShare {
        self.xor(BoolShare::public(id, v))
    }

    #[inline]
    pub fn shl(self, n: u32) -> BoolShare {
        BoolShare::new(self.a << n, self.b << n)
    }

    #[inline]
    pub fn shr(self, n: u32) -> BoolShare {
        BoolShare::new(self.a >> n, self.b >> n)
    }

    #[inline]
    pub fn mask(self, m: u64) -> BoolShare {
        BoolShare::new(self.a & m, self.b & m)
    }
}

/// Splits `x` into three replicated shares, one per party.
pub fn share_secret<R: Rng + ?Sized>(x: Ring, rng: &mut R) -> [RepShare; 3] {
    let x0 = Ring(rng.random());
    let x1 = Ring(rng.random());
    let x2 = x - x0 - x1;
    [RepShare::new(x0, x1), RepShare::new(x1, x2), RepShare::new(x2, x0)]
}

/// Shares every element; returns one vector per party.
pub fn share_vector<R: Rng + ?Sized>(xs: &[Ring], rng: &mut R) -> [Vec<RepShare>; 3] {
    let mut out: [Vec<RepShare>; 3] = Default::default();
    for v in out.iter_mut() {
        v.reserve(xs.len());
    }
    for &x in xs {
        let s = share_secret(x, rng);
        for p in 0..3 {
            out[p].push(s[p]);
        }
    }
    out
}

/// Reconstructs from all three views, checking that overlapping components agree.
pub fn reconstruct(shares: &[RepShare; 3]) -> Result<Ring> {
    for i in 0..3 {
        let j = (i + 1) % 3;
        if shares[i].b != shares[j].a {
            return Err(Error::Consistency(format!(
                "component x_{j} held by parties {i} and {j} differs"
            )));
        }
    }
    Ok(shares[0].a + shares[1].a + shares[2].a)
}

pub fn reconstruct_vector(views: &[Vec<RepShare>; 3]) -> Result<Vec<Ring>> {
    let n = views[0].len();
    if views.iter().any(|v| v.len() != n) {
        return Err(Error::Consistency("share vectors have different lengths".into()));
    }
    (0..n).map(|k| reconstruct(&[views[0][k], views[1][k], views[2][k]])).collect()
}

pub fn reconstruct_bool(shares: &[BoolShare; 3]) -> Result<u64> {
    for i in 0..3 {
        let j = (i + 1) % 3;
        if shares[i].b != shares[j].a {
            return Err(Error::Consistency(format!("boolean component {j} differs")));
        }
    }
    Ok(shares[0].a ^ shares[1].a ^ shares[2].a)
}
