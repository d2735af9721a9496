use serde::{Deserialize, Serialize};

use super::params::CrfParams;
use super::{NB, ND, NI, NR};
use crate::features::SparseVector;
use crate::optim::{argmax, log_sum_exp};
use crate::snippets::{
    DisclosureLabel, IntentionLabel, InterpretationLabel, Label, ResponseLabels, SnippetLabels,
    StrategyLabel,
};
use crate::{Error, Result};

/// Observation vectors of one snippet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrfInstance {
    pub snippet_id: String,
    /// Suspect features with the parent's under the context prefix.
    pub context: SparseVector,
    /// One vector per direct response.
    pub responses: Vec<SparseVector>,
}

/// Label indices for every variable of one snippet. `b` is `None` for the
/// three-task model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub i: usize,
    pub d: usize,
    pub r: Vec<usize>,
    pub b: Option<Vec<usize>>,
}

impl Assignment {
    pub fn from_labels(labels: &SnippetLabels, with_strategy: bool) -> Self {
        Assignment {
            i: labels.intention.index(),
            d: labels.disclosure.index(),
            r: labels
                .per_response
                .iter()
                .map(|r| r.interpretation.index())
                .collect(),
            b: with_strategy.then(|| {
                labels
                    .per_response
                    .iter()
                    .map(|r| r.strategy.index())
                    .collect()
            }),
        }
    }

    /// Maps indices back to labels; strategies default to the lowest label
    /// when `b` is absent.
    pub fn to_labels(&self) -> SnippetLabels {
        let label = |idx: usize| {
            StrategyLabel::from_index(idx).expect("strategy index in range")
        };
        SnippetLabels {
            intention: IntentionLabel::from_index(self.i).expect("intention index in range"),
            disclosure: DisclosureLabel::from_index(self.d).expect("disclosure index in range"),
            per_response: self
                .r
                .iter()
                .enumerate()
                .map(|(k, &r)| ResponseLabels {
                    interpretation: InterpretationLabel::from_index(r)
                        .expect("interpretation index in range"),
                    strategy: self.b.as_ref().map_or(StrategyLabel::Normal, |b| label(b[k])),
                })
                .collect(),
        }
    }
}

/// Log-potential tables of one snippet under fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SnippetGraph {
    pub snippet_id: String,
    pub u_i: [f64; NI],
    pub u_d: [f64; ND],
    pub u_r: Vec<[f64; NR]>,
    /// Present for the four-task model.
    pub u_b: Option<Vec<[f64; NB]>>,
    pub t_ir: [[f64; NR]; NI],
    pub t_dr: [[f64; NR]; ND],
    pub t_rb: Option<[[f64; NB]; NR]>,
}

impl SnippetGraph {
    pub fn responses(&self) -> usize {
        self.u_r.len()
    }

    /// Unnormalized log-score of a full assignment.
    pub fn score(&self, a: &Assignment) -> f64 {
        let mut s = self.u_i[a.i] + self.u_d[a.d];
        for (k, &r) in a.r.iter().enumerate() {
            s += self.u_r[k][r] + self.t_ir[a.i][r] + self.t_dr[a.d][r];
            if let (Some(ub), Some(trb), Some(b)) = (&self.u_b, &self.t_rb, &a.b) {
                s += ub[k][b[k]] + trb[r][b[k]];
            }
        }
        s
    }

    /// Checks an assignment's arity against the graph.
    pub fn check(&self, a: &Assignment) -> Result<()> {
        let bad = |m: String| Err(Error::Label(m));
        if a.i >= NI || a.d >= ND {
            return bad(format!("intention/disclosure index out of range in {}", self.snippet_id));
        }
        if a.r.len() != self.responses() || a.r.iter().any(|&r| r >= NR) {
            return bad(format!(
                "{}: expected {} interpretation labels in 0..{NR}",
                self.snippet_id,
                self.responses()
            ));
        }
        match (&a.b, &self.u_b) {
            (Some(b), Some(_)) if b.len() == self.responses() && b.iter().all(|&x| x < NB) => Ok(()),
            (None, None) => Ok(()),
            _ => bad(format!("{}: strategy labels do not match the model", self.snippet_id)),
        }
    }
}

fn unary<const K: usize>(w: &crate::optim::LogRegWeights, x: &SparseVector) -> [f64; K] {
    let mut u = [0.0; K];
    for (k, v) in u.iter_mut().enumerate() {
        *v = x.dot(w.row(k)) + w.bias[k];
    }
    u
}

/// Computes every log-potential of `instance` under `params`.
pub fn build_snippet_graph(instance: &CrfInstance, params: &CrfParams) -> Result<SnippetGraph> {
    let dim_mismatch = |expected, actual| Error::Dimension { expected, actual };
    if instance.context.dim() != params.dim_ctx() {
        return Err(dim_mismatch(params.dim_ctx(), instance.context.dim()));
    }
    if let Some(x) = instance.responses.iter().find(|x| x.dim() != params.dim_resp()) {
        return Err(dim_mismatch(params.dim_resp(), x.dim()));
    }
    if instance.responses.is_empty() {
        return Err(Error::Data(format!("{} has no responses", instance.snippet_id)));
    }
    Ok(SnippetGraph {
        snippet_id: instance.snippet_id.clone(),
        u_i: unary(&params.intention, &instance.context),
        u_d: unary(&params.disclosure, &instance.context),
        u_r: instance
            .responses
            .iter()
            .map(|x| unary(&params.interpretation, x))
            .collect(),
        u_b: params
            .strategy
            .as_ref()
            .map(|w| instance.responses.iter().map(|x| unary(w, x)).collect()),
        t_ir: params.t_ir,
        t_dr: params.t_dr,
        t_rb: params.t_rb,
    })
}

/// Exact log-partition, marginals and MAP of one snippet.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    pub log_z: f64,
    pub p_i: [f64; NI],
    pub p_d: [f64; ND],
    pub p_r: Vec<[f64; NR]>,
    pub p_b: Option<Vec<[f64; NB]>>,
    pub p_ir: Vec<[[f64; NR]; NI]>,
    pub p_dr: Vec<[[f64; NR]; ND]>,
    pub p_rb: Option<Vec<[[f64; NB]; NR]>>,
    pub map: Assignment,
}

impl InferenceResult {
    /// Per-variable argmax of the unary marginals (lowest index on ties).
    pub fn marginal_decode(&self) -> Assignment {
        Assignment {
            i: argmax(&self.p_i),
            d: argmax(&self.p_d),
            r: self.p_r.iter().map(|p| argmax(p)).collect(),
            b: self.p_b.as_ref().map(|pb| pb.iter().map(|p| argmax(p)).collect()),
        }
    }
}

/// Max and lowest argmax.
fn max_arg(v: &[f64]) -> (f64, usize) {
    let a = argmax(v);
    (v[a], a)
}

/// Exact inference by eliminating each b_k into r_k, each r_k into the
/// (i, d) pair, then enumerating the nine (i, d) values.
pub fn infer_exact(g: &SnippetGraph) -> InferenceResult {
    let n = g.responses();
    let strategy = g.u_b.as_ref().zip(g.t_rb.as_ref());

    // Per response, per r: log-sum and max over b, and the argmax b.
    let mut lb = vec![[0.0; NR]; n];
    let mut mb = vec![[0.0; NR]; n];
    let mut best_b = vec![[0usize; NR]; n];
    if let Some((ub, trb)) = strategy {
        for k in 0..n {
            for r in 0..NR {
                let row: Vec<f64> = (0..NB).map(|b| ub[k][b] + trb[r][b]).collect();
                lb[k][r] = log_sum_exp(&row);
                let (m, a) = max_arg(&row);
                mb[k][r] = m;
                best_b[k][r] = a;
            }
        }
    }

    // Per response, per (i, d): log-sum and max over r.
    let mut msg = vec![[[0.0; ND]; NI]; n];
    let mut mmsg = vec![[[0.0; ND]; NI]; n];
    let mut best_r = vec![[[0usize; ND]; NI]; n];
    for k in 0..n {
        for i in 0..NI {
            for d in 0..ND {
                let base: [f64; NR] =
                    std::array::from_fn(|r| g.t_ir[i][r] + g.t_dr[d][r] + g.u_r[k][r]);
                let sum_row: [f64; NR] = std::array::from_fn(|r| base[r] + lb[k][r]);
                let max_row: [f64; NR] = std::array::from_fn(|r| base[r] + mb[k][r]);
                msg[k][i][d] = log_sum_exp(&sum_row);
                let (m, a) = max_arg(&max_row);
                mmsg[k][i][d] = m;
                best_r[k][i][d] = a;
            }
        }
    }

    let mut s = [[0.0; ND]; NI];
    let mut ms = [[0.0; ND]; NI];
    for i in 0..NI {
        for d in 0..ND {
            s[i][d] = g.u_i[i] + g.u_d[d] + (0..n).map(|k| msg[k][i][d]).sum::<f64>();
            ms[i][d] = g.u_i[i] + g.u_d[d] + (0..n).map(|k| mmsg[k][i][d]).sum::<f64>();
        }
    }
    let log_z = log_sum_exp(s.as_flattened());
    let best = argmax(ms.as_flattened());
    let (mi, md) = (best / ND, best % ND);
    let map_r: Vec<usize> = (0..n).map(|k| best_r[k][mi][md]).collect();
    let map = Assignment {
        i: mi,
        d: md,
        b: strategy.map(|_| (0..n).map(|k| best_b[k][map_r[k]]).collect()),
        r: map_r,
    };

    let mut p_id = [[0.0; ND]; NI];
    for i in 0..NI {
        for d in 0..ND {
            p_id[i][d] = (s[i][d] - log_z).exp();
        }
    }
    let p_i: [f64; NI] = std::array::from_fn(|i| p_id[i].iter().sum());
    let p_d: [f64; ND] = std::array::from_fn(|d| (0..NI).map(|i| p_id[i][d]).sum());

    let mut p_ir = vec![[[0.0; NR]; NI]; n];
    let mut p_dr = vec![[[0.0; NR]; ND]; n];
    let mut p_r = vec![[0.0; NR]; n];
    for k in 0..n {
        for i in 0..NI {
            for d in 0..ND {
                for r in 0..NR {
                    let cond = (g.t_ir[i][r] + g.t_dr[d][r] + g.u_r[k][r] + lb[k][r]
                        - msg[k][i][d])
                        .exp();
                    let joint = p_id[i][d] * cond;
                    p_ir[k][i][r] += joint;
                    p_dr[k][d][r] += joint;
                }
            }
        }
        for r in 0..NR {
            p_r[k][r] = (0..NI).map(|i| p_ir[k][i][r]).sum();
        }
    }

    let (p_b, p_rb) = match strategy {
        Some((ub, trb)) => {
            let mut p_rb = vec![[[0.0; NB]; NR]; n];
            let mut p_b = vec![[0.0; NB]; n];
            for k in 0..n {
                for r in 0..NR {
                    for b in 0..NB {
                        let cond = (ub[k][b] + trb[r][b] - lb[k][r]).exp();
                        p_rb[k][r][b] = p_r[k][r] * cond;
                        p_b[k][b] += p_rb[k][r][b];
                    }
                }
            }
            (Some(p_b), Some(p_rb))
        }
        None => (None, None),
    };

    InferenceResult {
        log_z,
        p_i,
        p_d,
        p_r,
        p_b,
        p_ir,
        p_dr,
        p_rb,
        map,
    }
}
