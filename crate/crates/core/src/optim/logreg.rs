use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{minimize, ObjectiveEvaluation, OptimConfig, CHUNK};
use crate::features::SparseVector;
use crate::{Error, Result};

/// Multinomial logistic regression weights: one row per label plus a bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegWeights {
    pub labels: Vec<String>,
    pub dim: usize,
    /// Row-major `labels × dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LogRegWeights {
    pub fn zeros(labels: Vec<String>, dim: usize) -> Self {
        let k = labels.len();
        LogRegWeights {
            labels,
            dim,
            weights: vec![0.0; k * dim],
            bias: vec![0.0; k],
        }
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.weights[k * self.dim..(k + 1) * self.dim]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.weights[k * self.dim..(k + 1) * self.dim]
    }

    /// Parameters as one vector: weights, then biases.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.weights.clone();
        v.extend_from_slice(&self.bias);
        v
    }

    pub fn from_flat(labels: Vec<String>, dim: usize, flat: &[f64]) -> Self {
        let k = labels.len();
        assert_eq!(flat.len(), k * dim + k);
        LogRegWeights {
            labels,
            dim,
            weights: flat[..k * dim].to_vec(),
            bias: flat[k * dim..].to_vec(),
        }
    }

    pub fn scores(&self, x: &SparseVector) -> Vec<f64> {
        (0..self.n_labels())
            .map(|k| x.dot(self.row(k)) + self.bias[k])
            .collect()
    }
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Index of the largest value; the lowest index wins ties.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// A validated logistic regression training problem.
#[derive(Debug, Clone, Copy)]
pub struct LogRegProblem<'a> {
    xs: &'a [SparseVector],
    ys: &'a [usize],
    n_labels: usize,
    dim: usize,
    l2: f64,
}

impl<'a> LogRegProblem<'a> {
    pub fn new(xs: &'a [SparseVector], ys: &'a [usize], n_labels: usize, l2: f64) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::Data(format!(
                "{} vectors and {} labels",
                xs.len(),
                ys.len()
            )));
        }
        if let Some(&y) = ys.iter().find(|&&y| y >= n_labels) {
            return Err(Error::Label(format!("label index {y} out of range 0..{n_labels}")));
        }
        let dim = xs[0].dim();
        if let Some(x) = xs.iter().find(|x| x.dim() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                actual: x.dim(),
            });
        }
        if l2.is_nan() || l2 < 0.0 {
            return Err(Error::Config(format!("l2 must be non-negative, got {l2}")));
        }
        Ok(LogRegProblem {
            xs,
            ys,
            n_labels,
            dim,
            l2,
        })
    }

    pub fn n_params(&self) -> usize {
        self.n_labels * (self.dim + 1)
    }

    /// Regularized negative log-likelihood (biases unregularized) and its
    /// gradient at the flat parameter vector `params`.
    pub fn evaluate(&self, params: &[f64]) -> ObjectiveEvaluation {
        let (k, dim) = (self.n_labels, self.dim);
        let n_params = self.n_params();
        let weights = &params[..k * dim];
        let bias = &params[k * dim..];

        // Fixed-size chunks reduced in order keep the sum bit-reproducible
        // for any thread count.
        let partials: Vec<(f64, Vec<f64>)> = self
            .xs
            .par_chunks(CHUNK)
            .zip(self.ys.par_chunks(CHUNK))
            .map(|(xs, ys)| {
                let mut value = 0.0;
                let mut grad = vec![0.0; n_params];
                let mut scores = vec![0.0; k];
                for (x, &y) in xs.iter().zip(ys) {
                    for (c, s) in scores.iter_mut().enumerate() {
                        *s = x.dot(&weights[c * dim..(c + 1) * dim]) + bias[c];
                    }
                    let lse = log_sum_exp(&scores);
                    value += lse - scores[y];
                    for (c, &s) in scores.iter().enumerate() {
                        let r = (s - lse).exp() - if c == y { 1.0 } else { 0.0 };
                        x.axpy(r, &mut grad[c * dim..(c + 1) * dim]);
                        grad[k * dim + c] += r;
                    }
                }
                (value, grad)
            })
            .collect();

        let mut value = 0.0;
        let mut gradient = vec![0.0; n_params];
        for (v, g) in partials {
            value += v;
            for (a, b) in gradient.iter_mut().zip(&g) {
                *a += b;
            }
        }
        if self.l2 > 0.0 {
            for (g, w) in gradient[..k * dim].iter_mut().zip(weights) {
                *g += self.l2 * w;
            }
            value += 0.5 * self.l2 * weights.iter().map(|w| w * w).sum::<f64>();
        }
        ObjectiveEvaluation { value, gradient }
    }
}

/// Objective of `weights` on `(xs, ys)`.
pub fn logreg_objective(
    xs: &[SparseVector],
    ys: &[usize],
    weights: &LogRegWeights,
    l2: f64,
) -> Result<ObjectiveEvaluation> {
    let problem = LogRegProblem::new(xs, ys, weights.n_labels(), l2)?;
    if problem.dim != weights.dim {
        return Err(Error::Dimension {
            expected: weights.dim,
            actual: problem.dim,
        });
    }
    Ok(problem.evaluate(&weights.to_flat()))
}

/// Fits weights by L-BFGS from zero initialization.
pub fn train_logreg(
    xs: &[SparseVector],
    ys: &[usize],
    labels: Vec<String>,
    l2: f64,
    config: &OptimConfig,
) -> Result<LogRegWeights> {
    let problem = LogRegProblem::new(xs, ys, labels.len(), l2)?;
    let first = ys[0];
    if ys.iter().all(|&y| y == first) {
        return Err(Error::Data(format!(
            "training labels are all `{}`; need at least two distinct labels",
            labels[first]
        )));
    }
    let min = minimize(|p| problem.evaluate(p), vec![0.0; problem.n_params()], config)?;
    Ok(LogRegWeights::from_flat(labels, problem.dim, &min.x))
}

/// Most probable label (lowest index on ties) and the softmax distribution.
pub fn predict_logreg(weights: &LogRegWeights, x: &SparseVector) -> Result<(usize, Vec<f64>)> {
    if x.dim() != weights.dim {
        return Err(Error::Dimension {
            expected: weights.dim,
            actual: x.dim(),
        });
    }
    let scores = weights.scores(x);
    let lse = log_sum_exp(&scores);
    let dist: Vec<f64> = scores.iter().map(|s| (s - lse).exp()).collect();
    Ok((argmax(&scores), dist))
}
