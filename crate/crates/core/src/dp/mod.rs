//! Differential-privacy mechanisms: the plaintext reference samplers and
//! their secret-shared counterparts.

mod mpc;
mod plain;

pub use mpc::{index_from_ring, LAP_OPEN_LABEL, QEM_OPEN_LABEL};
pub use plain::{exp_mechanism_select, plain_exp_mechanism_select, plain_laplace, PlainNoise, Selection};

use crate::error::{Error, Result};

/// Total budget `ε` spread over `T` iterations, half to selection and half
/// to measurement in each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    epsilon: f64,
    iterations: usize,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, iterations: usize) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::argument(format!("epsilon must be positive and finite, got {epsilon}")));
        }
        if iterations == 0 {
            return Err(Error::argument("iterations must be at least 1"));
        }
        Ok(PrivacyBudget { epsilon, iterations })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Budget of each selection and each measurement, `ε / 2T`.
    pub fn per_call(&self) -> f64 {
        self.epsilon / (2.0 * self.iterations as f64)
    }

    /// Laplace scale for a sensitivity-1 query at `ε / 2T`, i.e. `2T / ε`.
    pub fn laplace_scale(&self) -> f64 {
        2.0 * self.iterations as f64 / self.epsilon
    }
}
