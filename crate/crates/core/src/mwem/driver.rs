use std::time::{Duration, Instant};

use super::{average_distributions, eval_workload_public, mw_update, ApproxDistribution, Histogram, LinearQuery};
use crate::dp::{plain_exp_mechanism_select, plain_laplace, PlainNoise, PrivacyBudget};
use crate::error::{Error, Result};
use crate::par::Exec;

/// Which iterates are averaged into the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// `A_1 … A_T`, the distributions produced by the updates.
    #[default]
    Updated,
    /// `A_0 … A_{T−1}`, starting from the uniform prior.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwemConfig {
    pub budget: PrivacyBudget,
    pub averaging: Averaging,
    pub exec: Exec,
}

impl MwemConfig {
    pub fn new(epsilon: f64, iterations: usize) -> Result<Self> {
        Ok(MwemConfig { budget: PrivacyBudget::new(epsilon, iterations)?, averaging: Averaging::default(), exec: Exec::default() })
    }
}

/// Source of the two private steps of an iteration. Indices are 1-based.
pub trait MechanismBackend {
    /// Selects a query given the public answers `q(A)` of every query.
    fn select(&mut self, approx: &[f64], eps_prime: f64) -> Result<usize>;
    /// Noisy answer of query `index` at Laplace scale `b`.
    fn measure(&mut self, index: usize, b: f64) -> Result<f64>;
}

/// Plaintext mechanisms over exact answers held by a trusted curator.
pub struct CentralBackend {
    answers: Vec<f64>,
    noise: PlainNoise,
}

impl CentralBackend {
    pub fn new(workload: &[LinearQuery], data: &Histogram, noise: PlainNoise, exec: Exec) -> Result<Self> {
        Ok(CentralBackend { answers: eval_workload_public(workload, &data.as_f64(), exec)?, noise })
    }

    pub fn answers(&self) -> &[f64] {
        &self.answers
    }
}

impl MechanismBackend for CentralBackend {
    fn select(&mut self, approx: &[f64], eps_prime: f64) -> Result<usize> {
        if approx.len() != self.answers.len() {
            return Err(Error::argument("approximate answers do not match the workload"));
        }
        let scores: Vec<f64> = approx.iter().zip(&self.answers).map(|(a, d)| (a - d).abs()).collect();
        plain_exp_mechanism_select(&scores, eps_prime, &mut self.noise)
    }

    fn measure(&mut self, index: usize, b: f64) -> Result<f64> {
        let answer = *self
            .answers
            .get(index.wrapping_sub(1))
            .ok_or_else(|| Error::argument(format!("query index {index} out of range")))?;
        plain_laplace(answer, b, &mut self.noise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// 1-based index of the selected query.
    pub index: usize,
    pub measurement: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub answers: Duration,
    pub select: Duration,
    pub measure: Duration,
    pub update: Duration,
}

#[derive(Debug, Clone)]
pub struct MwemOutput {
    pub distribution: ApproxDistribution,
    pub iterations: Vec<IterationRecord>,
    pub timings: PhaseTimings,
}

/// Runs `T` iterations of select, measure and update starting from the
/// uniform distribution of mass `n`, and averages the iterates.
pub fn run_mwem(config: &MwemConfig, n: f64, workload: &[LinearQuery], backend: &mut dyn MechanismBackend) -> Result<MwemOutput> {
    let cells = workload.first().ok_or_else(|| Error::argument("empty workload"))?.len();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::argument(format!("record count must be positive, got {n}")));
    }
    let t = config.budget.iterations();
    let eps_prime = config.budget.per_call();
    let b = config.budget.laplace_scale();

    let mut a = ApproxDistribution::uniform(cells, n);
    let mut history = Vec::with_capacity(t + 1);
    history.push(a.clone());
    let mut iterations = Vec::with_capacity(t);
    let mut timings = PhaseTimings::default();

    for i in 0..t {
        let clock = Instant::now();
        let approx = eval_workload_public(workload, a.weights(), config.exec)?;
        timings.answers += clock.elapsed();

        let clock = Instant::now();
        let index = backend.select(&approx, eps_prime)?;
        if index == 0 || index > workload.len() {
            return Err(Error::protocol(format!("selected index {index} outside 1..={}", workload.len())));
        }
        timings.select += clock.elapsed();

        let clock = Instant::now();
        let measurement = backend.measure(index, b)?;
        timings.measure += clock.elapsed();

        let clock = Instant::now();
        mw_update(&mut a, &workload[index - 1], measurement, approx[index - 1], config.exec)?;
        timings.update += clock.elapsed();

        log::debug!("iteration {}: query {index}, measurement {measurement:.4}", i + 1);
        iterations.push(IterationRecord { index, measurement });
        history.push(a.clone());
    }

    let chosen = match config.averaging {
        Averaging::Updated => &history[1..],
        Averaging::Literal => &history[..t],
    };
    Ok(MwemOutput { distribution: average_distributions(chosen)?, iterations, timings })
}
