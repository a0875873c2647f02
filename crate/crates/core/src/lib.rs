//! Differentially private synthetic data (MWEM) computed by three
//! semi-honest parties over replicated secret shares.
//!
//! Data holders share histograms of their rows; the parties evaluate the
//! query workload on the shared histogram once, then run the selection and
//! measurement mechanisms obliviously each iteration. Only the selected
//! query index and the noisy measurement are ever opened.

pub mod data;
pub mod dp;
pub mod error;
pub mod eval;
pub mod mwem;
pub mod par;
pub mod primitives;
pub mod ring;
pub mod session;
pub mod sharing;
pub mod sim;
#[cfg(feature = "pinned-tape")]
pub mod tape;
pub mod transport;

pub use error::{Error, Result};
pub use ring::{FixedPointCodec, Ring};
