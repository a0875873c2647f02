use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::HistogramDomain;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::ring::{FixedPointCodec, Ring};
use crate::sharing::RepShare;

/// Linear query: one coefficient in `[−1, 1]` per domain cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearQuery {
    coeffs: Vec<f64>,
}

impl LinearQuery {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(c) = coeffs.iter().find(|c| !(-1.0..=1.0).contains(*c)) {
            return Err(Error::argument(format!("query coefficient {c} outside [-1, 1]")));
        }
        Ok(LinearQuery { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// `Σ_x q(x)·h(x)`.
pub fn eval_query_public(q: &LinearQuery, h: &[f64]) -> Result<f64> {
    check_dims(q, h.len())?;
    Ok(q.coeffs.iter().zip(h).map(|(c, v)| c * v).sum())
}

/// Answers of every query on a public histogram.
pub fn eval_workload_public(workload: &[LinearQuery], h: &[f64], exec: Exec) -> Result<Vec<f64>> {
    for q in workload {
        check_dims(q, h.len())?;
    }
    Ok(exec.map_slice(workload, |q| q.coeffs.iter().zip(h).map(|(c, v)| c * v).sum()))
}

/// Fixed-point share of `q(D)` from shares of integer cell counts; purely
/// local because the coefficients are public.
pub fn eval_query_shared(q: &LinearQuery, h: &[RepShare], codec: &FixedPointCodec) -> Result<RepShare> {
    check_dims(q, h.len())?;
    Ok(dot_shared(q, h, codec))
}

pub fn eval_workload_shared(workload: &[LinearQuery], h: &[RepShare], codec: &FixedPointCodec, exec: Exec) -> Result<Vec<RepShare>> {
    for q in workload {
        check_dims(q, h.len())?;
    }
    Ok(exec.map_slice(workload, |q| dot_shared(q, h, codec)))
}

fn dot_shared(q: &LinearQuery, h: &[RepShare], codec: &FixedPointCodec) -> RepShare {
    let mut acc = RepShare::ZERO;
    for (c, s) in q.coeffs.iter().zip(h) {
        if *c == 1.0 {
            acc += s.mul_public(Ring::ONE.shl(codec.frac_bits()));
        } else if *c != 0.0 {
            acc += s.mul_public(codec.encode_unchecked(*c));
        }
    }
    acc
}

fn check_dims(q: &LinearQuery, cells: usize) -> Result<()> {
    if q.len() != cells {
        return Err(Error::argument(format!("query has {} coefficients, histogram has {cells} cells", q.len())));
    }
    Ok(())
}

/// Reproducible random counting queries. For each query and attribute, with
/// probability 1/2 every category is allowed, otherwise a uniformly random
/// non-empty proper subset; the query counts cells in the product of the
/// allowed sets.
pub fn gen_workload(domain: &HistogramDomain, count: usize, seed: u64) -> Result<Vec<LinearQuery>> {
    if count == 0 {
        return Err(Error::argument("workload must contain at least one query"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let cards = domain.cardinalities();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let allowed: Vec<Vec<bool>> = cards
            .iter()
            .map(|&c| {
                if c == 1 || rng.random_bool(0.5) {
                    return vec![true; c];
                }
                let k = rng.random_range(1..c);
                let mut mask = vec![false; c];
                for i in sample(&mut rng, c, k) {
                    mask[i] = true;
                }
                mask
            })
            .collect();
        let coeffs = (0..domain.size())
            .map(|cell| {
                let t = domain.tuple(cell);
                if t.iter().zip(&allowed).all(|(&v, a)| a[v]) { 1.0 } else { 0.0 }
            })
            .collect();
        out.push(LinearQuery { coeffs });
    }
    Ok(out)
}
