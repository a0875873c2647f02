use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
#[cfg(feature = "pinned-tape")]
use crate::tape::Tape;

/// Randomness for the plaintext mechanisms.
#[derive(Debug, Clone)]
pub enum PlainNoise {
    Rng(ChaCha12Rng),
    /// Consumes a tape exactly as the shared mechanisms do: one `f`-bit
    /// uniform per selection, one uniform and one bit per measurement.
    #[cfg(feature = "pinned-tape")]
    Tape { tape: Tape, frac_bits: u32 },
}

impl PlainNoise {
    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> Result<f64> {
        match self {
            PlainNoise::Rng(rng) => Ok(rng.random::<f64>()),
            #[cfg(feature = "pinned-tape")]
            PlainNoise::Tape { tape, frac_bits } => Ok(tape.uniform_raw(*frac_bits)? as f64 / 2f64.powi(*frac_bits as i32)),
        }
    }

    /// Uniform on `{−1, +1}`.
    pub fn sign(&mut self) -> Result<f64> {
        let bit = match self {
            PlainNoise::Rng(rng) => rng.random::<bool>() as u64,
            #[cfg(feature = "pinned-tape")]
            PlainNoise::Tape { tape, .. } => tape.bit()?,
        };
        Ok(2.0 * bit as f64 - 1.0)
    }
}

/// Outcome of one exponential-mechanism draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    /// 1-based selected index.
    pub index: usize,
    /// Distance from the threshold to the nearest cumulative weight; a
    /// fixed-point evaluation can only disagree when this is tiny.
    pub margin: f64,
}

/// Exponential mechanism over `scores` at budget `ε'` with the uniform draw
/// `r ∈ [0, 1)` supplied: weights `exp(0.5·ε'·s_i − max)`, then the first
/// index whose cumulative weight exceeds `r` times the total, or `N` if none.
pub fn exp_mechanism_select(scores: &[f64], eps_prime: f64, r: f64) -> Result<Selection> {
    if scores.is_empty() {
        return Err(Error::argument("exponential mechanism over an empty score vector"));
    }
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::argument(format!("non-finite score {bad}")));
    }
    let err: Vec<f64> = scores.iter().map(|s| 0.5 * eps_prime * s).collect();
    let max_err = err.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut cumulative = Vec::with_capacity(err.len());
    let mut acc = 0.0;
    for e in &err {
        acc += (e - max_err).exp();
        cumulative.push(acc);
    }
    let t = acc * r;
    let margin = cumulative.iter().map(|c| (c - t).abs()).fold(f64::INFINITY, f64::min);
    let index = cumulative.iter().position(|&c| c > t).map_or(scores.len(), |i| i + 1);
    Ok(Selection { index, margin })
}

/// Draws an index (1-based) with probability `∝ exp(0.5·ε'·score)`.
pub fn plain_exp_mechanism_select(scores: &[f64], eps_prime: f64, noise: &mut PlainNoise) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::argument("exponential mechanism over an empty score vector"));
    }
    let r = noise.uniform()?;
    Ok(exp_mechanism_select(scores, eps_prime, r)?.index)
}

/// `value + b·ln(u)·c` with `u` uniform on `(0, 1]` and `c` a uniform sign.
pub fn plain_laplace(value: f64, b: f64, noise: &mut PlainNoise) -> Result<f64> {
    if !(b >= 0.0) {
        return Err(Error::argument(format!("Laplace scale must be non-negative, got {b}")));
    }
    let u = 1.0 - noise.uniform()?;
    let c = noise.sign()?;
    Ok(value + b * u.ln() * c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng_noise(seed: u64) -> PlainNoise {
        PlainNoise::Rng(ChaCha12Rng::seed_from_u64(seed))
    }

    fn frequencies(scores: &[f64], eps: f64, trials: usize, seed: u64) -> Vec<f64> {
        let mut noise = rng_noise(seed);
        let mut counts = vec![0usize; scores.len()];
        for _ in 0..trials {
            counts[plain_exp_mechanism_select(scores, eps, &mut noise).unwrap() - 1] += 1;
        }
        counts.into_iter().map(|c| c as f64 / trials as f64).collect()
    }

    #[test]
    fn equal_scores_are_uniform() {
        for f in frequencies(&[1.0; 4], 0.7, 50_000, 1) {
            assert!((f - 0.25).abs() <= 0.02, "{f}");
        }
    }

    #[test]
    fn single_candidate() {
        let mut noise = rng_noise(2);
        for _ in 0..100 {
            assert_eq!(plain_exp_mechanism_select(&[3.0], 1.0, &mut noise).unwrap(), 1);
        }
    }

    #[test]
    fn weights_one_to_three() {
        let f = frequencies(&[0.0, 3f64.ln()], 2.0, 50_000, 3);
        assert!((f[0] - 0.25).abs() <= 0.02 && (f[1] - 0.75).abs() <= 0.02, "{f:?}");
    }

    #[test]
    fn proportional_to_exponential_weights() {
        let scores: [f64; 8] = [0.0, 2.0, 5.0, 1.0, 4.5, 3.0, 0.5, 2.5];
        let eps: f64 = 0.8;
        let w: Vec<f64> = scores.iter().map(|s| (0.5 * eps * s).exp()).collect();
        let total: f64 = w.iter().sum();
        let f = frequencies(&scores, eps, 50_000, 4);
        for (fi, wi) in f.iter().zip(&w) {
            assert!((fi - wi / total).abs() <= 0.02);
        }
    }

    #[test]
    fn empty_scores_rejected() {
        assert!(matches!(plain_exp_mechanism_select(&[], 1.0, &mut rng_noise(0)), Err(Error::Argument(_))));
    }

    #[test]
    fn threshold_scan_with_fixed_draws() {
        // weights 1,1,1,1: cumulative 1,2,3,4
        let s = [0.0; 4];
        assert_eq!(exp_mechanism_select(&s, 1.0, 0.0).unwrap().index, 1);
        assert_eq!(exp_mechanism_select(&s, 1.0, 0.5).unwrap().index, 3);
        // t equal to a cumulative value is not "greater": 0.25·4 = 1 → index 2
        assert_eq!(exp_mechanism_select(&s, 1.0, 0.25).unwrap().index, 2);
        assert_eq!(exp_mechanism_select(&s, 1.0, 0.25).unwrap().margin, 0.0);
        // r just below one still lands on the last cell
        assert_eq!(exp_mechanism_select(&s, 1.0, 0.999_999).unwrap().index, 4);
    }

    #[test]
    fn laplace_zero_scale_is_exact() {
        let mut noise = rng_noise(5);
        assert_eq!(plain_laplace(12.5, 0.0, &mut noise).unwrap(), 12.5);
    }

    #[test]
    fn laplace_moments() {
        let mut noise = rng_noise(6);
        let n = 50_000;
        let xs: Vec<f64> = (0..n).map(|_| plain_laplace(0.0, 2.0, &mut noise).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() <= 0.05, "mean {mean}");
        assert!((var - 8.0).abs() <= 0.8, "var {var}");
    }
}
