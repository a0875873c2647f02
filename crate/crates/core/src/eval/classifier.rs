use crate::data::{Record, Schema};
use crate::error::{Error, Result};
use crate::par::Exec;

/// One-hot encoding of every non-label column; the label is positive when
/// its category index is above 0.
#[derive(Debug, Clone)]
pub struct FeatureEncoder {
    label: usize,
    /// (column, offset of its first indicator)
    columns: Vec<(usize, usize)>,
    width: usize,
}

impl FeatureEncoder {
    pub fn new(schema: &Schema) -> Result<Self> {
        let label = schema.label().ok_or_else(|| Error::argument("schema has no label column"))?;
        let mut columns = Vec::new();
        let mut width = 0;
        for (i, c) in schema.columns().iter().enumerate() {
            if i != label {
                columns.push((i, width));
                width += c.categories.len();
            }
        }
        Ok(FeatureEncoder { label, columns, width })
    }

    /// Number of indicator features (excluding the intercept).
    pub fn width(&self) -> usize {
        self.width
    }

    /// Indices of the active indicators of a record.
    pub fn active(&self, r: &Record) -> Vec<usize> {
        self.columns.iter().map(|&(c, off)| off + r[c]).collect()
    }

    pub fn label(&self, r: &Record) -> bool {
        r[self.label] > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrParams {
    pub learning_rate: f64,
    pub tolerance: f64,
    pub max_iter: usize,
    /// L2 penalty on the weights (not the intercept).
    pub l2: f64,
}

impl Default for LrParams {
    fn default() -> Self {
        LrParams { learning_rate: 0.1, tolerance: 1e-6, max_iter: 1000, l2: 0.0 }
    }
}

/// Logistic regression on one-hot features, fitted by full-batch gradient
/// descent on the mean log-loss.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    encoder: FeatureEncoder,
    weights: Vec<f64>,
    bias: f64,
    iterations: usize,
}

const CHUNK: usize = 1024;

impl LogisticRegression {
    pub fn train(schema: &Schema, rows: &[Record], params: &LrParams, exec: Exec) -> Result<Self> {
        let encoder = FeatureEncoder::new(schema)?;
        let xs: Vec<Vec<usize>> = rows.iter().map(|r| encoder.active(r)).collect();
        let ys: Vec<f64> = rows.iter().map(|r| encoder.label(r) as u8 as f64).collect();
        let positives = ys.iter().filter(|&&y| y == 1.0).count();
        if positives == 0 || positives == ys.len() {
            return Err(Error::Data("training labels contain a single class".into()));
        }
        let n = rows.len() as f64;
        let d = encoder.width();
        let mut w = vec![0.0; d];
        let mut bias = 0.0;
        let mut prev_loss = f64::INFINITY;
        let mut iterations = 0;
        let chunks = xs.len().div_ceil(CHUNK);
        for _ in 0..params.max_iter {
            iterations += 1;
            // per-chunk partial gradients, reduced in chunk order so the
            // result does not depend on the execution policy
            let partial = exec.map_range(chunks, |c| {
                let mut g = vec![0.0; d + 1];
                let mut loss = 0.0;
                for k in c * CHUNK..((c + 1) * CHUNK).min(xs.len()) {
                    let z = bias + xs[k].iter().map(|&j| w[j]).sum::<f64>();
                    let p = sigmoid(z);
                    loss += log1pexp(z) - ys[k] * z;
                    let r = p - ys[k];
                    for &j in &xs[k] {
                        g[j] += r;
                    }
                    g[d] += r;
                }
                (g, loss)
            });
            let mut grad = vec![0.0; d + 1];
            let mut loss = 0.0;
            for (g, l) in partial {
                grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
                loss += l;
            }
            loss = loss / n + 0.5 * params.l2 * w.iter().map(|v| v * v).sum::<f64>();
            for j in 0..d {
                w[j] -= params.learning_rate * (grad[j] / n + params.l2 * w[j]);
            }
            bias -= params.learning_rate * grad[d] / n;
            if (prev_loss - loss).abs() < params.tolerance {
                break;
            }
            prev_loss = loss;
        }
        Ok(LogisticRegression { encoder, weights: w, bias, iterations })
    }

    /// Probability of the positive class.
    pub fn predict(&self, r: &Record) -> f64 {
        sigmoid(self.bias + self.encoder.active(r).iter().map(|&j| self.weights[j]).sum::<f64>())
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn encoder(&self) -> &FeatureEncoder {
        &self.encoder
    }

    /// AUC of the model's scores against the true labels of `rows`.
    pub fn auc(&self, rows: &[Record]) -> Result<f64> {
        let scores: Vec<f64> = rows.iter().map(|r| self.predict(r)).collect();
        let labels: Vec<bool> = rows.iter().map(|r| self.encoder.label(r)).collect();
        auc_roc(&scores, &labels)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn log1pexp(z: f64) -> f64 {
    if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() }
}

/// Area under the ROC curve via the rank-sum statistic, ties at midranks.
pub fn auc_roc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::argument("scores and labels differ in length"));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::argument("AUC needs both classes"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::argument("NaN score"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += order[i..=j].iter().filter(|&&k| labels[k]).count() as f64 * midrank;
        i = j + 1;
    }
    let p = pos as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * neg as f64))
}
