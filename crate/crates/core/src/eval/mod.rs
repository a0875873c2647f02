//! Utility measures for synthetic data: workload error, total variation
//! distance and downstream classifier quality.

mod classifier;

pub use classifier::{auc_roc, FeatureEncoder, LogisticRegression, LrParams};

use crate::error::{Error, Result};
use crate::mwem::{eval_workload_public, LinearQuery};
use crate::par::Exec;

/// Largest and mean of `|q(synth) − q(real)| / n` over the workload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkloadError {
    pub max: f64,
    pub avg: f64,
}

pub fn workload_error(real: &[f64], synth: &[f64], workload: &[LinearQuery], n: f64, exec: Exec) -> Result<WorkloadError> {
    if real.len() != synth.len() {
        return Err(Error::argument(format!("histograms have {} and {} cells", real.len(), synth.len())));
    }
    if workload.is_empty() {
        return Err(Error::argument("empty workload"));
    }
    let r = eval_workload_public(workload, real, exec)?;
    let s = eval_workload_public(workload, synth, exec)?;
    let errs: Vec<f64> = r.iter().zip(&s).map(|(a, b)| (a - b).abs() / n).collect();
    Ok(WorkloadError { max: errs.iter().copied().fold(0.0, f64::max), avg: errs.iter().sum::<f64>() / errs.len() as f64 })
}

/// Total variation distance between the normalized histograms.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::argument(format!("histograms have {} and {} cells", p.len(), q.len())));
    }
    let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    if sp <= 0.0 || sq <= 0.0 {
        return Err(Error::argument("histogram with no mass"));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a / sp - b / sq).abs()).sum::<f64>())
}
