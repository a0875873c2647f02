//! Binary container for one party's shares of one holder's histogram.
//!
//! Layout: the magic `MWEMSHR1`, six little-endian u64 header fields
//! (version, ring bits, fractional bits, domain size, party id, holder id),
//! then `2 × domain size` little-endian u64 share components.

use std::fs;
use std::path::Path;

use rand::{CryptoRng, Rng};

use crate::error::{Error, Result};
use crate::mwem::Histogram;
use crate::ring::{FixedPointCodec, Ring, RING_BITS};
use crate::sharing::{share_secret, PartyId, RepShare};

pub const MAGIC: &[u8; 8] = b"MWEMSHR1";
pub const SHARE_FILE_VERSION: u64 = 1;
const HEADER_BYTES: usize = 8 + 6 * 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareFile {
    pub frac_bits: u32,
    pub party: PartyId,
    pub holder: u64,
    pub shares: Vec<RepShare>,
}

impl ShareFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + 16 * self.shares.len());
        out.extend_from_slice(MAGIC);
        for v in [
            SHARE_FILE_VERSION,
            RING_BITS as u64,
            self.frac_bits as u64,
            self.shares.len() as u64,
            self.party.raw() as u64,
            self.holder,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for s in &self.shares {
            out.extend_from_slice(&s.a.0.to_le_bytes());
            out.extend_from_slice(&s.b.0.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_BYTES || &bytes[..8] != MAGIC {
            return Err(Error::Format("not a share file (bad magic or truncated header)".into()));
        }
        let word = |i: usize| u64::from_le_bytes(bytes[i * 8..i * 8 + 8].try_into().unwrap());
        let (version, k, f, cells, party, holder) = (word(1), word(2), word(3), word(4), word(5), word(6));
        if version != SHARE_FILE_VERSION {
            return Err(Error::Format(format!("unsupported share file version {version}")));
        }
        if k != RING_BITS as u64 {
            return Err(Error::Format(format!("share file uses a {k}-bit ring, expected {RING_BITS}")));
        }
        let frac_bits = u32::try_from(f).ok().filter(|f| FixedPointCodec::new(*f).is_ok()).ok_or_else(|| Error::Format(format!("invalid fractional bits {f}")))?;
        let party = u8::try_from(party).ok().and_then(|p| PartyId::new(p).ok()).ok_or_else(|| Error::Format(format!("invalid party id {party}")))?;
        let payload = &bytes[HEADER_BYTES..];
        let expected = cells.checked_mul(16).ok_or_else(|| Error::Format("domain size overflows".into()))?;
        if payload.len() as u64 != expected {
            return Err(Error::Format(format!(
                "payload holds {} bytes, header promises {cells} share pairs ({expected} bytes)",
                payload.len()
            )));
        }
        let shares = payload
            .chunks_exact(16)
            .map(|c| {
                RepShare::new(
                    Ring(u64::from_le_bytes(c[..8].try_into().unwrap())),
                    Ring(u64::from_le_bytes(c[8..].try_into().unwrap())),
                )
            })
            .collect();
        Ok(ShareFile { frac_bits, party, holder, shares })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::Data(format!("cannot write {}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::Data(format!("cannot read share file {}: {e}", path.display())))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// Splits a holder's histogram into one share file per party. Counts are
/// shared as plain integers.
pub fn share_histogram<R: Rng + CryptoRng>(h: &Histogram, codec: &FixedPointCodec, holder: u64, rng: &mut R) -> [ShareFile; 3] {
    let mut per_party: [Vec<RepShare>; 3] = Default::default();
    for &c in h.counts() {
        let s = share_secret(Ring(c), rng);
        for p in 0..3 {
            per_party[p].push(s[p]);
        }
    }
    let mut ids = PartyId::all().into_iter();
    per_party.map(|shares| ShareFile { frac_bits: codec.frac_bits(), party: ids.next().unwrap(), holder, shares })
}

/// Adds up one party's share files from every holder.
pub fn aggregate_shares(files: &[ShareFile]) -> Result<Vec<RepShare>> {
    let first = files.first().ok_or_else(|| Error::argument("no share files given"))?;
    let mut holders = std::collections::HashSet::new();
    for f in files {
        if f.party != first.party {
            return Err(Error::Format(format!("share files for parties {} and {} mixed", first.party, f.party)));
        }
        if f.frac_bits != first.frac_bits {
            return Err(Error::Format(format!("fractional bits differ across share files ({} vs {})", first.frac_bits, f.frac_bits)));
        }
        if f.shares.len() != first.shares.len() {
            return Err(Error::Format(format!("domain sizes differ across share files ({} vs {})", first.shares.len(), f.shares.len())));
        }
        if !holders.insert(f.holder) {
            return Err(Error::Format(format!("holder {} appears twice", f.holder)));
        }
    }
    let mut sum = vec![RepShare::ZERO; first.shares.len()];
    for f in files {
        for (acc, s) in sum.iter_mut().zip(&f.shares) {
            *acc += *s;
        }
    }
    Ok(sum)
}
