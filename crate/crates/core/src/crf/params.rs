use serde::{Deserialize, Serialize};

use super::{NB, ND, NI, NR};
use crate::optim::LogRegWeights;
use crate::snippets::{
    DisclosureLabel, IntentionLabel, InterpretationLabel, Label, StrategyLabel,
};
use crate::{Error, Result};

/// Which variables the model contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrfTasks {
    /// i, d, r_k and b_k.
    All,
    /// i, d and r_k only; no strategy variables or factors.
    Idr,
}

impl CrfTasks {
    pub fn has_strategy(self) -> bool {
        self == CrfTasks::All
    }

    /// Task letters in model order.
    pub fn letters(self) -> &'static [&'static str] {
        match self {
            CrfTasks::All => &["I", "D", "R", "B"],
            CrfTasks::Idr => &["I", "D", "R"],
        }
    }
}

pub(crate) fn label_names<L: Label>() -> Vec<String> {
    L::all().iter().map(|l| l.name().to_string()).collect()
}

/// Weights of the joint model. Unary blocks read the context vector (i, d)
/// or a response's own vector (r, b); pairwise tables are weights on label
/// pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrfParams {
    pub tasks: CrfTasks,
    pub intention: LogRegWeights,
    pub disclosure: LogRegWeights,
    pub interpretation: LogRegWeights,
    pub strategy: Option<LogRegWeights>,
    pub t_ir: [[f64; NR]; NI],
    pub t_dr: [[f64; NR]; ND],
    pub t_rb: Option<[[f64; NB]; NR]>,
}

impl CrfParams {
    pub fn zeros(tasks: CrfTasks, dim_ctx: usize, dim_resp: usize) -> Self {
        let all = tasks.has_strategy();
        CrfParams {
            tasks,
            intention: LogRegWeights::zeros(label_names::<IntentionLabel>(), dim_ctx),
            disclosure: LogRegWeights::zeros(label_names::<DisclosureLabel>(), dim_ctx),
            interpretation: LogRegWeights::zeros(label_names::<InterpretationLabel>(), dim_resp),
            strategy: all.then(|| LogRegWeights::zeros(label_names::<StrategyLabel>(), dim_resp)),
            t_ir: [[0.0; NR]; NI],
            t_dr: [[0.0; NR]; ND],
            t_rb: all.then_some([[0.0; NB]; NR]),
        }
    }

    pub fn dim_ctx(&self) -> usize {
        self.intention.dim
    }

    pub fn dim_resp(&self) -> usize {
        self.interpretation.dim
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.tasks, self.dim_ctx(), self.dim_resp())
    }

    /// Blocks in order W_I, W_D, W_R, [W_B], T_IR, T_DR, [T_RB]; each unary
    /// block is its weights followed by its biases.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.layout().len);
        v.extend(self.intention.to_flat());
        v.extend(self.disclosure.to_flat());
        v.extend(self.interpretation.to_flat());
        if let Some(w) = &self.strategy {
            v.extend(w.to_flat());
        }
        v.extend(self.t_ir.iter().flatten());
        v.extend(self.t_dr.iter().flatten());
        if let Some(t) = &self.t_rb {
            v.extend(t.iter().flatten());
        }
        v
    }

    pub fn from_flat(layout: &Layout, flat: &[f64]) -> Result<Self> {
        if flat.len() != layout.len {
            return Err(Error::Dimension {
                expected: layout.len,
                actual: flat.len(),
            });
        }
        let block = |range: &std::ops::Range<usize>, labels: Vec<String>, dim| {
            LogRegWeights::from_flat(labels, dim, &flat[range.clone()])
        };
        let (dc, dr) = (layout.dim_ctx, layout.dim_resp);
        Ok(CrfParams {
            tasks: layout.tasks,
            intention: block(&layout.w_i, label_names::<IntentionLabel>(), dc),
            disclosure: block(&layout.w_d, label_names::<DisclosureLabel>(), dc),
            interpretation: block(&layout.w_r, label_names::<InterpretationLabel>(), dr),
            strategy: layout
                .w_b
                .as_ref()
                .map(|r| block(r, label_names::<StrategyLabel>(), dr)),
            t_ir: table(&flat[layout.t_ir.clone()]),
            t_dr: table(&flat[layout.t_dr.clone()]),
            t_rb: layout.t_rb.as_ref().map(|r| table(&flat[r.clone()])),
        })
    }

    /// Checks block shapes, label counts and finiteness.
    pub fn validate(&self) -> Result<()> {
        let check = |w: &LogRegWeights, k: usize, dim: usize, name: &str| -> Result<()> {
            if w.labels.len() != k || w.bias.len() != k || w.weights.len() != k * dim || w.dim != dim {
                return Err(Error::ModelFile(format!("block {name} has the wrong shape")));
            }
            Ok(())
        };
        check(&self.intention, NI, self.dim_ctx(), "W_I")?;
        check(&self.disclosure, ND, self.dim_ctx(), "W_D")?;
        check(&self.interpretation, NR, self.dim_resp(), "W_R")?;
        match (&self.strategy, &self.t_rb, self.tasks) {
            (Some(w), Some(_), CrfTasks::All) => check(w, NB, self.dim_resp(), "W_B")?,
            (None, None, CrfTasks::Idr) => {}
            _ => {
                return Err(Error::ModelFile(
                    "strategy blocks do not match the task set".into(),
                ))
            }
        }
        if self.to_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::ModelFile("non-finite parameter".into()));
        }
        Ok(())
    }
}

fn table<const R: usize, const C: usize>(flat: &[f64]) -> [[f64; C]; R] {
    let mut t = [[0.0; C]; R];
    for (a, row) in t.iter_mut().enumerate() {
        row.copy_from_slice(&flat[a * C..(a + 1) * C]);
    }
    t
}

/// Offsets of each block in the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub tasks: CrfTasks,
    pub dim_ctx: usize,
    pub dim_resp: usize,
    pub w_i: std::ops::Range<usize>,
    pub w_d: std::ops::Range<usize>,
    pub w_r: std::ops::Range<usize>,
    pub w_b: Option<std::ops::Range<usize>>,
    pub t_ir: std::ops::Range<usize>,
    pub t_dr: std::ops::Range<usize>,
    pub t_rb: Option<std::ops::Range<usize>>,
    pub len: usize,
}

impl Layout {
    pub fn new(tasks: CrfTasks, dim_ctx: usize, dim_resp: usize) -> Self {
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        let w_i = take(NI * (dim_ctx + 1));
        let w_d = take(ND * (dim_ctx + 1));
        let w_r = take(NR * (dim_resp + 1));
        let w_b = tasks.has_strategy().then(|| take(NB * (dim_resp + 1)));
        let t_ir = take(NI * NR);
        let t_dr = take(ND * NR);
        let t_rb = tasks.has_strategy().then(|| take(NR * NB));
        Layout {
            tasks,
            dim_ctx,
            dim_resp,
            w_i,
            w_d,
            w_r,
            w_b,
            t_ir,
            t_dr,
            t_rb,
            len: at,
        }
    }
}
