//! Multiplicative weights with the exponential mechanism over a public
//! approximating distribution.

mod domain;
mod driver;
mod query;
mod update;

pub use domain::{HistogramDomain, MAX_CELLS};
pub use driver::{run_mwem, Averaging, CentralBackend, IterationRecord, MechanismBackend, MwemConfig, MwemOutput, PhaseTimings};
pub use query::{eval_query_public, eval_query_shared, eval_workload_public, eval_workload_shared, gen_workload, LinearQuery};
pub use update::{average_distributions, mw_update};

/// Cell counts of a plaintext dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
}

impl Histogram {
    pub fn zeros(cells: usize) -> Self {
        Histogram { counts: vec![0; cells] }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        Histogram { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn counts_mut(&mut self) -> &mut [u64] {
        &mut self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    /// Element-wise sum; both histograms must cover the same domain.
    pub fn merged(&self, other: &Histogram) -> crate::Result<Histogram> {
        if self.len() != other.len() {
            return Err(crate::Error::argument("histograms cover different domains"));
        }
        Ok(Histogram { counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect() })
    }
}

/// Non-negative weights over the domain with total mass `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxDistribution {
    weights: Vec<f64>,
    mass: f64,
}

impl ApproxDistribution {
    /// `n` times the uniform distribution.
    pub fn uniform(cells: usize, mass: f64) -> Self {
        ApproxDistribution { weights: vec![mass / cells as f64; cells], mass }
    }

    /// Wraps weights, taking their sum as the mass.
    pub fn from_weights(weights: Vec<f64>) -> crate::Result<Self> {
        if weights.is_empty() {
            return Err(crate::Error::argument("distribution over an empty domain"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(crate::Error::argument(format!("invalid weight {w}")));
        }
        let mass = weights.iter().sum();
        Ok(ApproxDistribution { weights, mass })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }
}
