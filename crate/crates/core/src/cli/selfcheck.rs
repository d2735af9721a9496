use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::crf::oracle::{brute_force, max_deviation};
use crate::crf::{
    build_snippet_graph, infer_exact, random_assignment, random_instance, random_params, random_vector,
    CrfProblem, CrfTasks,
};
use crate::optim::{finite_difference_gradient, relative_error, LogRegProblem};

pub const INFERENCE_TOLERANCE: f64 = 1e-8;
pub const GRADIENT_TOLERANCE: f64 = 1e-6;
const STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheck {
    pub trials: usize,
    /// Largest |difference| in log Z or any marginal, exact vs enumeration.
    pub max_inference_deviation: f64,
    pub map_mismatches: usize,
    pub crf_gradient_error: f64,
    pub logreg_gradient_error: f64,
}

impl SelfCheck {
    pub fn passed(&self) -> bool {
        self.max_inference_deviation < INFERENCE_TOLERANCE
            && self.map_mismatches == 0
            && self.crf_gradient_error < GRADIENT_TOLERANCE
            && self.logreg_gradient_error < GRADIENT_TOLERANCE
    }
}

/// Compares exact inference with enumeration on `trials` random graphs with
/// up to three responses, and analytic gradients with central differences.
pub fn selfcheck(seed: u64, trials: usize) -> SelfCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dev: f64 = 0.0;
    let mut mismatches = 0;
    for t in 0..trials {
        let tasks = if t % 4 == 3 { CrfTasks::Idr } else { CrfTasks::All };
        let params = random_params(&mut rng, tasks, 4, 3, 2.0);
        let n = rng.random_range(1..=3);
        let x = random_instance(&mut rng, "sc", 4, 3, n);
        let g = build_snippet_graph(&x, &params).expect("matching dimensions");
        let (d, same) = max_deviation(&infer_exact(&g), &brute_force(&g));
        dev = dev.max(d);
        if !same {
            mismatches += 1;
        }
    }

    let mut crf_err: f64 = 0.0;
    for tasks in [CrfTasks::All, CrfTasks::Idr] {
        let data: Vec<_> = (0..5)
            .map(|s| {
                let n = rng.random_range(1..=3);
                let x = random_instance(&mut rng, &format!("s{s}"), 4, 3, n);
                (x, random_assignment(&mut rng, n, tasks.has_strategy()))
            })
            .collect();
        let flat = random_params(&mut rng, tasks, 4, 3, 0.5).to_flat();
        let layout = crate::crf::Layout::new(tasks, 4, 3);
        let problem = CrfProblem::new(&data, &layout, 0.3).expect("valid toy set");
        let analytic = problem.evaluate(&flat).gradient;
        let numeric = finite_difference_gradient(|p| problem.evaluate(p).value, &flat, STEP);
        crf_err = crf_err.max(relative_error(&analytic, &numeric));
    }

    let xs: Vec<_> = (0..12).map(|_| random_vector(&mut rng, 5, 0.6)).collect();
    let ys: Vec<usize> = (0..12).map(|j| j % 3).collect();
    let problem = LogRegProblem::new(&xs, &ys, 3, 0.3).expect("valid toy set");
    let w: Vec<f64> = (0..problem.n_params()).map(|_| rng.random_range(-0.5..=0.5)).collect();
    let analytic = problem.evaluate(&w).gradient;
    let numeric = finite_difference_gradient(|p| problem.evaluate(p).value, &w, STEP);

    SelfCheck {
        trials,
        max_inference_deviation: dev,
        map_mismatches: mismatches,
        crf_gradient_error: crf_err,
        logreg_gradient_error: relative_error(&analytic, &numeric),
    }
}
