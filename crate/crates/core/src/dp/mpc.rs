//! Secret-shared exponential and Laplace mechanisms.
//!
//! Both come in batched form (many independent instances advance through
//! the same communication rounds) and return the result still shared; the
//! caller decides who learns it.

use crate::error::{Error, Result};
use crate::ring::Ring;
use crate::sharing::{Party, RepShare};
use crate::transport::Transport;

/// Open-log label for a selected query index.
pub const QEM_OPEN_LABEL: &str = "selected-index";
/// Open-log label for a noisy measurement.
pub const LAP_OPEN_LABEL: &str = "measurement";

impl<T: Transport> Party<T> {
    /// Exponential-mechanism selection for each instance. `answers[j]` are
    /// the shared true answers (fixed point) and `approx[j]` the public
    /// approximate answers of instance `j`. Returns the shared 1-based index.
    pub fn qem_shared(&mut self, answers: &[Vec<RepShare>], approx: &[Vec<f64>], eps_prime: f64) -> Result<Vec<RepShare>> {
        if answers.len() != approx.len() {
            return Err(Error::argument("answer and approximation batches differ in length"));
        }
        for (a, q) in answers.iter().zip(approx) {
            if a.is_empty() || a.len() != q.len() {
                return Err(Error::argument(format!(
                    "selection needs equal non-empty vectors, got {} shared and {} public answers",
                    a.len(),
                    q.len()
                )));
            }
        }
        if !(eps_prime.is_finite() && eps_prime > 0.0) {
            return Err(Error::argument(format!("selection budget must be positive, got {eps_prime}")));
        }
        let codec = self.codec();
        let flat: Vec<RepShare> = answers.iter().flatten().copied().collect();
        let approx_raw = approx
            .iter()
            .flatten()
            .map(|&q| codec.encode(q))
            .collect::<Result<Vec<Ring>>>()?;

        // |q(A) − q(D)| via the sign of the difference
        let diff: Vec<RepShare> = flat.iter().zip(&approx_raw).map(|(d, a)| self.add_public(-*d, *a)).collect();
        let neg = self.ltz(&diff)?;
        let flip: Vec<RepShare> = neg.iter().map(|b| self.add_public(b.mul_public(Ring::from_signed(-2)), Ring::ONE)).collect();
        let abs = self.mul(&diff, &flip)?;
        let err = self.mul_public_fixed(&abs, 0.5 * eps_prime)?;

        let groups = split(&err, answers);
        let max_err = self.max_groups(&groups)?;
        let shifted: Vec<RepShare> = groups
            .iter()
            .zip(&max_err)
            .flat_map(|(g, m)| g.iter().map(move |e| *e - *m))
            .collect();
        let es = self.exp(&shifted)?;

        let mut cumulative = Vec::with_capacity(answers.len());
        let mut totals = Vec::with_capacity(answers.len());
        for g in split(&es, answers) {
            let mut acc = RepShare::ZERO;
            let c: Vec<RepShare> = g
                .iter()
                .map(|e| {
                    acc += *e;
                    acc
                })
                .collect();
            totals.push(acc);
            cumulative.push(c);
        }
        let r = self.random_fixed(answers.len())?;
        let t = self.mul_fixed(&totals, &r)?;
        self.select_index_from_cumulative(&cumulative, &t)
    }

    /// Counts the cumulative weights strictly above the threshold and turns
    /// the count `s` into the 1-based index `N − (s − 1)`, or `N` when `s = 0`.
    pub fn select_index_from_cumulative(&mut self, cumulative: &[Vec<RepShare>], t: &[RepShare]) -> Result<Vec<RepShare>> {
        if cumulative.len() != t.len() {
            return Err(Error::argument("one threshold per instance is required"));
        }
        let flat: Vec<RepShare> = cumulative.iter().flatten().copied().collect();
        let thresholds: Vec<RepShare> =
            cumulative.iter().zip(t).flat_map(|(c, t)| std::iter::repeat_n(*t, c.len())).collect();
        let above = self.gt(&flat, &thresholds)?;
        let s: Vec<RepShare> = split(&above, cumulative).iter().map(|g| g.iter().copied().fold(RepShare::ZERO, |a, b| a + b)).collect();
        let is_zero = self.eq_public(&s, Ring::ZERO)?;
        let s_minus_one: Vec<RepShare> = s.iter().map(|v| self.add_public(*v, -Ring::ONE)).collect();
        let not_zero: Vec<RepShare> = is_zero.iter().map(|c| self.add_public(-*c, Ring::ONE)).collect();
        let offset = self.mul(&s_minus_one, &not_zero)?;
        Ok(cumulative
            .iter()
            .zip(offset)
            .map(|(c, o)| self.add_public(-o, Ring(c.len() as u64)))
            .collect())
    }

    /// Single selection, opened to all three parties.
    pub fn pi_qem(&mut self, answers: &[RepShare], approx: &[f64], eps_prime: f64) -> Result<usize> {
        let k = self.qem_shared(&[answers.to_vec()], &[approx.to_vec()], eps_prime)?;
        let opened = self.open(QEM_OPEN_LABEL, &k)?;
        index_from_ring(opened[0], answers.len())
    }

    /// Laplace measurement `q(D) + b·ln(x)·c` with `x = 1 − u`, `u` a shared
    /// uniform and `c = 2r − 1` for a shared random bit `r`.
    pub fn lap_shared(&mut self, answers: &[RepShare], b: f64) -> Result<Vec<RepShare>> {
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::argument(format!("Laplace scale must be non-negative, got {b}")));
        }
        let n = answers.len();
        let one = self.codec().encode_int(1);
        let u = self.random_fixed(n)?;
        let x: Vec<RepShare> = u.iter().map(|s| self.add_public(-*s, one)).collect();
        let ln = self.ln(&x)?;
        let r = self.random_bits(n)?;
        let c: Vec<RepShare> = r.iter().map(|s| self.add_public(s.mul_public(Ring(2)), -Ring::ONE)).collect();
        let signed = self.mul(&ln, &c)?;
        let noise = self.mul_public_fixed(&signed, b)?;
        Ok(answers.iter().zip(noise).map(|(a, z)| *a + z).collect())
    }

    /// Single measurement, opened to all three parties.
    pub fn pi_lap(&mut self, answer: RepShare, b: f64) -> Result<f64> {
        let m = self.lap_shared(&[answer], b)?;
        let opened = self.open(LAP_OPEN_LABEL, &m)?;
        Ok(self.codec().decode(opened[0]))
    }
}

/// Converts an opened index, checking it lies in `[1, n]`.
pub fn index_from_ring(k: Ring, n: usize) -> Result<usize> {
    let k = k.signed();
    if k < 1 || k as u64 > n as u64 {
        return Err(Error::protocol(format!("selected index {k} outside 1..={n}")));
    }
    Ok(k as usize)
}

fn split<S>(flat: &[RepShare], shape: &[Vec<S>]) -> Vec<Vec<RepShare>> {
    let mut out = Vec::with_capacity(shape.len());
    let mut at = 0;
    for g in shape {
        out.push(flat[at..at + g.len()].to_vec());
        at += g.len();
    }
    out
}
