use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{build_snippet_graph, infer_exact, Assignment, CrfInstance};
use super::params::{CrfParams, CrfTasks, Layout};
use super::{NB, ND, NI, NR};
use crate::optim::{minimize, ObjectiveEvaluation, OptimConfig, CHUNK};
use crate::snippets::SnippetLabels;
use crate::{Error, Result};

/// How a label is read off the joint distribution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decoding {
    /// Jointly most probable assignment.
    #[default]
    Map,
    /// Argmax of each variable's marginal.
    Marginal,
}

impl std::str::FromStr for Decoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "map" => Ok(Decoding::Map),
            "marginal" => Ok(Decoding::Marginal),
            other => Err(Error::Config(format!("unknown decoding `{other}`"))),
        }
    }
}

/// A validated training set for one layout.
#[derive(Debug, Clone, Copy)]
pub struct CrfProblem<'a> {
    data: &'a [(CrfInstance, Assignment)],
    layout: &'a Layout,
    l2: f64,
}

impl<'a> CrfProblem<'a> {
    pub fn new(data: &'a [(CrfInstance, Assignment)], layout: &'a Layout, l2: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Data("empty CRF training set".into()));
        }
        if l2.is_nan() || l2 < 0.0 {
            return Err(Error::Config(format!("l2 must be non-negative, got {l2}")));
        }
        let zero = CrfParams::zeros(layout.tasks, layout.dim_ctx, layout.dim_resp);
        for (x, y) in data {
            build_snippet_graph(x, &zero)?.check(y)?;
        }
        Ok(CrfProblem { data, layout, l2 })
    }

    /// Negative conditional log-likelihood plus `l2/2 ‖θ‖²` over every
    /// parameter, with its gradient.
    pub fn evaluate(&self, flat: &[f64]) -> ObjectiveEvaluation {
        let layout = self.layout;
        let params = CrfParams::from_flat(layout, flat).expect("flat length matches layout");
        let partials: Vec<(f64, Vec<f64>)> = self
            .data
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut value = 0.0;
                let mut grad = vec![0.0; layout.len];
                for (x, y) in chunk {
                    let g = build_snippet_graph(x, &params).expect("validated dimensions");
                    let inf = infer_exact(&g);
                    value += inf.log_z - g.score(y);
                    accumulate(layout, x, y, &inf, &mut grad);
                }
                (value, grad)
            })
            .collect();

        let mut value = 0.0;
        let mut gradient = vec![0.0; layout.len];
        for (v, g) in partials {
            value += v;
            for (a, b) in gradient.iter_mut().zip(&g) {
                *a += b;
            }
        }
        if self.l2 > 0.0 {
            for (g, w) in gradient.iter_mut().zip(flat) {
                *g += self.l2 * w;
            }
            value += 0.5 * self.l2 * flat.iter().map(|w| w * w).sum::<f64>();
        }
        ObjectiveEvaluation { value, gradient }
    }
}

fn indicator(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Adds (expected − empirical) counts of one snippet to a unary block.
fn unary_block(
    block: &std::ops::Range<usize>,
    dim: usize,
    p: &[f64],
    gold: usize,
    x: &crate::features::SparseVector,
    grad: &mut [f64],
) {
    let k = p.len();
    let g = &mut grad[block.clone()];
    for (c, &pc) in p.iter().enumerate() {
        let r = pc - indicator(c, gold);
        x.axpy(r, &mut g[c * dim..(c + 1) * dim]);
        g[k * dim + c] += r;
    }
}

fn accumulate(
    layout: &Layout,
    x: &CrfInstance,
    y: &Assignment,
    inf: &super::graph::InferenceResult,
    grad: &mut [f64],
) {
    let (dc, dr) = (layout.dim_ctx, layout.dim_resp);
    unary_block(&layout.w_i, dc, &inf.p_i, y.i, &x.context, grad);
    unary_block(&layout.w_d, dc, &inf.p_d, y.d, &x.context, grad);
    for (k, xr) in x.responses.iter().enumerate() {
        let r_gold = y.r[k];
        unary_block(&layout.w_r, dr, &inf.p_r[k], r_gold, xr, grad);
        for i in 0..NI {
            for r in 0..NR {
                grad[layout.t_ir.start + i * NR + r] +=
                    inf.p_ir[k][i][r] - indicator(i, y.i) * indicator(r, r_gold);
            }
        }
        for d in 0..ND {
            for r in 0..NR {
                grad[layout.t_dr.start + d * NR + r] +=
                    inf.p_dr[k][d][r] - indicator(d, y.d) * indicator(r, r_gold);
            }
        }
        if let (Some(wb), Some(trb), Some(pb), Some(prb), Some(b)) = (
            &layout.w_b,
            &layout.t_rb,
            &inf.p_b,
            &inf.p_rb,
            &y.b,
        ) {
            unary_block(wb, dr, &pb[k], b[k], xr, grad);
            for r in 0..NR {
                for bb in 0..NB {
                    grad[trb.start + r * NB + bb] +=
                        prb[k][r][bb] - indicator(r, r_gold) * indicator(bb, b[k]);
                }
            }
        }
    }
}

/// Objective of `params` on `data`.
pub fn crf_objective(
    data: &[(CrfInstance, Assignment)],
    params: &CrfParams,
    l2: f64,
) -> Result<ObjectiveEvaluation> {
    let layout = params.layout();
    let problem = CrfProblem::new(data, &layout, l2)?;
    Ok(problem.evaluate(&params.to_flat()))
}

/// Pairs instances with their gold labels for the given task set.
pub fn crf_dataset(
    instances: Vec<CrfInstance>,
    labels: &[SnippetLabels],
    tasks: CrfTasks,
) -> Result<Vec<(CrfInstance, Assignment)>> {
    if instances.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} instances but {} label records",
            instances.len(),
            labels.len()
        )));
    }
    Ok(instances
        .into_iter()
        .zip(labels)
        .map(|(x, y)| (x, Assignment::from_labels(y, tasks.has_strategy())))
        .collect())
}

/// Maximum conditional likelihood training from zero initialization.
pub fn train_crf(
    data: &[(CrfInstance, Assignment)],
    l2: f64,
    config: &OptimConfig,
    tasks: CrfTasks,
) -> Result<CrfParams> {
    let first = data
        .first()
        .ok_or_else(|| Error::Data("empty CRF training set".into()))?;
    let dim_ctx = first.0.context.dim();
    let dim_resp = first
        .0
        .responses
        .first()
        .map(|x| x.dim())
        .ok_or_else(|| Error::Data(format!("{} has no responses", first.0.snippet_id)))?;
    let layout = Layout::new(tasks, dim_ctx, dim_resp);
    let problem = CrfProblem::new(data, &layout, l2)?;
    let min = minimize(|p| problem.evaluate(p), vec![0.0; layout.len], config)?;
    CrfParams::from_flat(&layout, &min.x)
}

/// Decodes one snippet.
pub fn predict_crf(params: &CrfParams, instance: &CrfInstance, decoding: Decoding) -> Result<Assignment> {
    let g = build_snippet_graph(instance, params)?;
    let inf = infer_exact(&g);
    Ok(match decoding {
        Decoding::Map => inf.map,
        Decoding::Marginal => inf.marginal_decode(),
    })
}
