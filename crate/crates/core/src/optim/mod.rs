//! Numerical optimization: L-BFGS, multinomial logistic regression and
//! finite-difference gradient checks.

mod gradcheck;
mod lbfgs;
mod logreg;

use thiserror::Error;

pub use gradcheck::{finite_difference_gradient, relative_error};
pub use lbfgs::{minimize, Minimum, OptimConfig};
pub use logreg::{logreg_objective, predict_logreg, train_logreg, LogRegProblem, LogRegWeights};
pub(crate) use logreg::{argmax, log_sum_exp};

/// Items per parallel work chunk. Chunks are reduced in order so objective
/// sums do not depend on the thread count.
pub(crate) const CHUNK: usize = 32;

/// Value and gradient of an objective at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveEvaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("gradient has length {actual}, expected {expected}")]
    GradientLength { expected: usize, actual: usize },
    #[error("objective is not finite at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("line search failed at iteration {iteration} (value {value}, gradient max-norm {gradient_max_norm})")]
    LineSearch {
        iteration: usize,
        value: f64,
        gradient_max_norm: f64,
    },
}
