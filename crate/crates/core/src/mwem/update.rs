use super::{ApproxDistribution, LinearQuery};
use crate::error::{Error, Result};
use crate::par::Exec;

/// Multiplicative-weights step towards measurement `m` of query `q`, whose
/// current answer on `a` is `q_a`: every cell is scaled by
/// `exp(q(x)·(m − q_a) / 2n)` and the result renormalized to mass `n`.
pub fn mw_update(a: &mut ApproxDistribution, q: &LinearQuery, m: f64, q_a: f64, exec: Exec) -> Result<()> {
    if q.len() != a.len() {
        return Err(Error::argument(format!("query has {} coefficients, distribution has {} cells", q.len(), a.len())));
    }
    if !m.is_finite() {
        return Err(Error::argument(format!("measurement {m} is not finite")));
    }
    let n = a.mass();
    let step = (m - q_a) / (2.0 * n);
    // shift the exponents so the largest factor is 1; cancels on renormalization
    let top = q.coeffs().iter().map(|c| c * step).fold(f64::NEG_INFINITY, f64::max);
    let coeffs = q.coeffs();
    let mut scaled: Vec<(f64, f64)> = a.weights().iter().copied().zip(coeffs.iter().copied()).collect();
    exec.for_each_mut(&mut scaled, |(w, c)| *w *= (*c * step - top).exp());
    let total: f64 = scaled.iter().map(|(w, _)| w).sum();
    let weights = a.weights_mut();
    if total > 0.0 && total.is_finite() {
        let k = n / total;
        for (dst, (w, _)) in weights.iter_mut().zip(scaled) {
            *dst = w * k;
        }
    } else {
        log::warn!("multiplicative update underflowed; resetting to uniform");
        let u = n / weights.len() as f64;
        weights.iter_mut().for_each(|w| *w = u);
    }
    Ok(())
}

/// Entry-wise mean of the given distributions.
pub fn average_distributions(history: &[ApproxDistribution]) -> Result<ApproxDistribution> {
    let first = history.first().ok_or_else(|| Error::argument("cannot average an empty history"))?;
    if history.iter().any(|a| a.len() != first.len()) {
        return Err(Error::argument("distributions cover different domains"));
    }
    let k = history.len() as f64;
    let mut out = vec![0.0; first.len()];
    for a in history {
        for (o, w) in out.iter_mut().zip(a.weights()) {
            *o += w;
        }
    }
    out.iter_mut().for_each(|o| *o /= k);
    ApproxDistribution::from_weights(out)
}
