use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{ObjectiveEvaluation, OptimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimConfig {
    /// Number of stored (s, y) correction pairs.
    pub memory: usize,
    pub max_iterations: usize,
    /// Convergence when the max-norm of the gradient drops below this.
    pub gradient_tolerance: f64,
    /// Sufficient-decrease constant of the line search.
    pub armijo: f64,
    /// Curvature constant of the (strong Wolfe) line search.
    pub wolfe: f64,
    pub max_line_search: usize,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            memory: 10,
            max_iterations: 1000,
            gradient_tolerance: 1e-5,
            armijo: 1e-4,
            wolfe: 0.9,
            max_line_search: 40,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<(), OptimError> {
        let bad = |m: &str| Err(OptimError::InvalidConfig(m.to_string()));
        if self.memory == 0 {
            return bad("memory must be at least 1");
        }
        if self.gradient_tolerance.is_nan() || self.gradient_tolerance <= 0.0 {
            return bad("gradient tolerance must be positive");
        }
        if !(0.0 < self.armijo && self.armijo < self.wolfe && self.wolfe < 1.0) {
            return bad("line search constants must satisfy 0 < armijo < wolfe < 1");
        }
        if self.max_line_search == 0 {
            return bad("max_line_search must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_max_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Objective value after each accepted step, starting with the value at
    /// the initial point.
    pub trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// A gradient this small is below what rounding lets a line search
/// resolve, so a failed search there means the optimum is reached to
/// machine precision rather than a defect in the objective.
fn stalled(e: &ObjectiveEvaluation) -> bool {
    max_norm(&e.gradient) <= f64::EPSILON.sqrt() * e.value.abs().max(1.0)
}

fn is_finite(e: &ObjectiveEvaluation) -> bool {
    e.value.is_finite() && e.gradient.iter().all(|g| g.is_finite())
}

struct Correction {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// Two-loop recursion: `-H g` for the inverse Hessian approximation `H`.
fn direction(g: &[f64], memory: &VecDeque<Correction>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for c in memory.iter().rev() {
        let a = c.rho * dot(&c.s, &q);
        for (qi, yi) in q.iter_mut().zip(&c.y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some(last) = memory.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        for qi in &mut q {
            *qi *= gamma;
        }
    }
    for (c, a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = c.rho * dot(&c.y, &q);
        for (qi, si) in q.iter_mut().zip(&c.s) {
            *qi += (a - b) * si;
        }
    }
    for qi in &mut q {
        *qi = -*qi;
    }
    q
}

struct Trial {
    step: f64,
    eval: ObjectiveEvaluation,
    slope: f64,
}

struct LineSearch<'a, F> {
    objective: &'a mut F,
    x: &'a [f64],
    d: &'a [f64],
    f0: f64,
    slope0: f64,
    armijo: f64,
    wolfe: f64,
    budget: usize,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> ObjectiveEvaluation> LineSearch<'_, F> {
    fn eval(&mut self, step: f64) -> Option<Trial> {
        if self.evaluations >= self.budget {
            return None;
        }
        self.evaluations += 1;
        let point: Vec<f64> = self.x.iter().zip(self.d).map(|(x, d)| x + step * d).collect();
        let eval = (self.objective)(&point);
        let slope = dot(&eval.gradient, self.d);
        Some(Trial { step, eval, slope })
    }

    fn sufficient(&self, t: &Trial) -> bool {
        t.eval.value <= self.f0 + self.armijo * t.step * self.slope0
    }

    fn curvature(&self, t: &Trial) -> bool {
        t.slope.abs() <= -self.wolfe * self.slope0
    }

    /// Strong Wolfe search by bracketing and zooming.
    fn search(&mut self, initial: f64) -> Option<Trial> {
        let mut prev: Option<Trial> = None;
        let mut step = initial;
        loop {
            let t = self.eval(step)?;
            if !is_finite(&t.eval) {
                // Overshot into overflow; back off towards the last good step.
                let lo = prev.as_ref().map_or(0.0, |p| p.step);
                step = lo + 0.5 * (step - lo);
                if step <= lo {
                    return None;
                }
                continue;
            }
            let worse = prev.as_ref().is_some_and(|p| t.eval.value >= p.eval.value);
            if !self.sufficient(&t) || worse {
                return self.zoom(prev, t);
            }
            if self.curvature(&t) {
                return Some(t);
            }
            if t.slope >= 0.0 {
                return self.zoom(Some(t), prev.unwrap_or_else(|| self.origin()));
            }
            step = t.step * 2.0;
            prev = Some(t);
        }
    }

    fn origin(&self) -> Trial {
        Trial {
            step: 0.0,
            eval: ObjectiveEvaluation {
                value: self.f0,
                gradient: Vec::new(),
            },
            slope: self.slope0,
        }
    }

    /// `lo` satisfies sufficient decrease and has the lower value; the
    /// minimizer lies between `lo` and `hi`.
    fn zoom(&mut self, lo: Option<Trial>, hi: Trial) -> Option<Trial> {
        let mut lo = lo.unwrap_or_else(|| self.origin());
        let mut hi = hi;
        loop {
            let width = (hi.step - lo.step).abs();
            if width <= 1e-14 * lo.step.abs().max(hi.step.abs()).max(1e-300) {
                return accept_lo(lo);
            }
            let step = interpolate(&lo, &hi);
            let t = match self.eval(step) {
                Some(t) => t,
                None => return accept_lo(lo),
            };
            if !is_finite(&t.eval) || !self.sufficient(&t) || t.eval.value >= lo.eval.value {
                hi = t;
            } else {
                if self.curvature(&t) {
                    return Some(t);
                }
                if t.slope * (hi.step - lo.step) >= 0.0 {
                    hi = lo;
                }
                lo = t;
            }
        }
    }
}

/// Falls back to the best step found when it still decreases the objective.
fn accept_lo(lo: Trial) -> Option<Trial> {
    (lo.step > 0.0).then_some(lo)
}

/// Safeguarded cubic interpolation between two trials.
fn interpolate(lo: &Trial, hi: &Trial) -> f64 {
    let (a, b) = (lo.step, hi.step);
    let (fa, fb) = (lo.eval.value, hi.eval.value);
    let (ga, gb) = (lo.slope, hi.slope);
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (right - left);
    let mid = 0.5 * (a + b);
    if !fb.is_finite() || !gb.is_finite() {
        return mid;
    }
    let d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - ga * gb;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = gb - ga + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let step = b - (b - a) * (gb + d2 - d1) / denom;
    if step.is_finite() && step > left + margin && step < right - margin {
        step
    } else {
        mid
    }
}

/// Minimizes a smooth objective with limited-memory BFGS.
///
/// Each step follows the two-loop-recursion direction with a line search
/// satisfying the strong Wolfe conditions, so accepted values never
/// increase. When the line search fails along a quasi-Newton direction the
/// memory is dropped and one steepest-descent step is tried; a second
/// failure aborts.
pub fn minimize<F>(mut objective: F, x0: Vec<f64>, config: &OptimConfig) -> Result<Minimum, OptimError>
where
    F: FnMut(&[f64]) -> ObjectiveEvaluation,
{
    config.validate()?;
    let mut x = x0;
    let mut current = objective(&x);
    let mut evaluations = 1;
    if current.gradient.len() != x.len() {
        return Err(OptimError::GradientLength {
            expected: x.len(),
            actual: current.gradient.len(),
        });
    }
    if !is_finite(&current) {
        return Err(OptimError::NonFinite { iteration: 0 });
    }
    let mut memory: VecDeque<Correction> = VecDeque::with_capacity(config.memory);
    let mut trace = vec![current.value];
    let mut iterations = 0;

    'outer: while iterations < config.max_iterations {
        if max_norm(&current.gradient) < config.gradient_tolerance {
            break;
        }
        let mut steepest = memory.is_empty();
        let mut d = direction(&current.gradient, &memory);
        let mut slope = dot(&d, &current.gradient);
        if !slope.is_finite() || slope >= 0.0 {
            memory.clear();
            steepest = true;
            d = direction(&current.gradient, &memory);
            slope = dot(&d, &current.gradient);
        }

        let trial = loop {
            let initial = if memory.is_empty() {
                (1.0 / dot(&current.gradient, &current.gradient).sqrt()).min(1.0)
            } else {
                1.0
            };
            let mut ls = LineSearch {
                objective: &mut objective,
                x: &x,
                d: &d,
                f0: current.value,
                slope0: slope,
                armijo: config.armijo,
                wolfe: config.wolfe,
                budget: config.max_line_search,
                evaluations: 0,
            };
            let found = ls.search(initial);
            evaluations += ls.evaluations;
            match found {
                Some(t) => break t,
                None if !steepest => {
                    memory.clear();
                    steepest = true;
                    d = direction(&current.gradient, &memory);
                    slope = dot(&d, &current.gradient);
                }
                None if stalled(&current) => break 'outer,
                None => {
                    return Err(OptimError::LineSearch {
                        iteration: iterations,
                        value: current.value,
                        gradient_max_norm: max_norm(&current.gradient),
                    })
                }
            }
        };

        let s: Vec<f64> = d.iter().map(|di| trial.step * di).collect();
        let y: Vec<f64> = trial
            .eval
            .gradient
            .iter()
            .zip(&current.gradient)
            .map(|(a, b)| a - b)
            .collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).max(f64::MIN_POSITIVE) && sy.is_finite() {
            if memory.len() == config.memory {
                memory.pop_front();
            }
            memory.push_back(Correction { s, y, rho: 1.0 / sy });
        }
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += trial.step * di;
        }
        current = trial.eval;
        trace.push(current.value);
        iterations += 1;
    }

    let gradient_max_norm = max_norm(&current.gradient);
    Ok(Minimum {
        x,
        value: current.value,
        gradient_max_norm,
        iterations,
        evaluations,
        converged: gradient_max_norm < config.gradient_tolerance,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> ObjectiveEvaluation {
        ObjectiveEvaluation {
            value: x.iter().map(|v| v * v).sum(),
            gradient: x.iter().map(|v| 2.0 * v).collect(),
        }
    }

    fn rosenbrock(p: &[f64]) -> ObjectiveEvaluation {
        let (x, y) = (p[0], p[1]);
        ObjectiveEvaluation {
            value: (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2),
            gradient: vec![
                -2.0 * (1.0 - x) - 400.0 * x * (y - x * x),
                200.0 * (y - x * x),
            ],
        }
    }

    fn tight() -> OptimConfig {
        OptimConfig {
            gradient_tolerance: 1e-10,
            ..Default::default()
        }
    }

    #[test]
    fn sphere_minimum_at_origin() {
        let m = minimize(sphere, vec![3.0, -4.0, 0.5], &tight()).unwrap();
        assert!(m.converged);
        assert!(m.value < 1e-18);
        assert!(m.x.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn rosenbrock_from_classic_start() {
        let m = minimize(rosenbrock, vec![-1.2, 1.0], &tight()).unwrap();
        assert!(m.converged, "{m:?}");
        assert!(m.iterations <= 500);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn quadratic_matches_closed_form() {
        // f(x) = 1/2 xᵀAx − bᵀx with A = diag(1..=6) + 0.5·(ones), minimizer A⁻¹b.
        let n = 6;
        let mut a = vec![vec![0.5; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += (i + 1) as f64;
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64) - 2.0).collect();
        let f = |x: &[f64]| {
            let ax: Vec<f64> = a.iter().map(|row| dot(row, x)).collect();
            ObjectiveEvaluation {
                value: 0.5 * dot(x, &ax) - dot(&b, x),
                gradient: ax.iter().zip(&b).map(|(p, q)| p - q).collect(),
            }
        };
        let m = minimize(f, vec![0.0; n], &tight()).unwrap();
        let expected = solve(a.clone(), b.clone());
        for (got, want) in m.x.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));

        let loose = OptimConfig {
            gradient_tolerance: 1e-6,
            ..Default::default()
        };
        let m = minimize(f, vec![0.0; n], &loose).unwrap();
        assert!(m.converged);
        assert!(m.iterations <= n + 5, "{} iterations", m.iterations);
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    // Gaussian elimination, test oracle only.
    fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn non_finite_start_aborts() {
        let f = |_: &[f64]| ObjectiveEvaluation {
            value: f64::NAN,
            gradient: vec![0.0],
        };
        assert!(matches!(
            minimize(f, vec![1.0], &OptimConfig::default()),
            Err(OptimError::NonFinite { .. })
        ));
    }

    #[test]
    fn wrong_gradient_aborts_after_steepest_retry() {
        // Gradient points the wrong way, so no step ever decreases f.
        let f = |x: &[f64]| ObjectiveEvaluation {
            value: x[0] * x[0],
            gradient: vec![-2.0 * x[0] - 1.0],
        };
        assert!(matches!(
            minimize(f, vec![1.0], &OptimConfig::default()),
            Err(OptimError::LineSearch { .. })
        ));
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let cfg = OptimConfig {
            max_iterations: 2,
            gradient_tolerance: 1e-12,
            ..Default::default()
        };
        let m = minimize(rosenbrock, vec![-1.2, 1.0], &cfg).unwrap();
        assert_eq!(m.iterations, 2);
        assert!(!m.converged);
    }

    #[test]
    fn invalid_config() {
        let cfg = OptimConfig {
            memory: 0,
            ..Default::default()
        };
        assert!(minimize(sphere, vec![1.0], &cfg).is_err());
    }
}
