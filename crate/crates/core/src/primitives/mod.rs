//! Oblivious building blocks over replicated shares: bit conversions,
//! comparisons, selection, maximum, exponential, logarithm and joint
//! randomness.
//!
//! Comparison outputs are shared bits with integer scale (0 or 1, no
//! fractional bits), so multiplying one into a fixed-point value needs no
//! truncation.

mod bits;
mod compare;
mod random;
mod transcendental;

pub use transcendental::{EXP2_NEG_COEFFS, LN1P_COEFFS};
