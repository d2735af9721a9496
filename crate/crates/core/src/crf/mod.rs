//! The joint conditional random field over one snippet's variables: the
//! suspect's intention `i` and disclosure `d`, and per response `k` the
//! interpretation `r_k` and strategy `b_k`.
//!
//! Unary factors score `i` and `d` from the context vector and `r_k`, `b_k`
//! from response `k`'s vector. Pairwise tables couple `i–r_k`, `d–r_k` and
//! `r_k–b_k`. Parameters are shared across responses and snippets.
//! Inference conditions on the nine `(i, d)` values, which makes the graph a
//! forest, so it is exact in `O(9·R·3·14)`.

mod graph;
mod objective;
pub mod oracle;
mod params;

use rand::Rng;

pub use graph::{build_snippet_graph, infer_exact, Assignment, CrfInstance, InferenceResult, SnippetGraph};
pub use objective::{crf_dataset, crf_objective, predict_crf, train_crf, CrfProblem, Decoding};
pub use params::{CrfParams, CrfTasks, Layout};

use crate::features::SparseVector;

pub const NI: usize = 3;
pub const ND: usize = 3;
pub const NR: usize = 3;
pub const NB: usize = 14;

/// Parameters with every entry uniform in `[-scale, scale]`.
pub fn random_params<R: Rng>(rng: &mut R, tasks: CrfTasks, dim_ctx: usize, dim_resp: usize, scale: f64) -> CrfParams {
    let layout = Layout::new(tasks, dim_ctx, dim_resp);
    let flat: Vec<f64> = (0..layout.len).map(|_| rng.random_range(-scale..=scale)).collect();
    CrfParams::from_flat(&layout, &flat).expect("layout length")
}

/// A random sparse vector with about `density` of its entries set.
pub fn random_vector<R: Rng>(rng: &mut R, dim: usize, density: f64) -> SparseVector {
    let mut entries = Vec::new();
    for j in 0..dim {
        if rng.random_bool(density) {
            entries.push((j, rng.random_range(-1.0..=1.0)));
        }
    }
    SparseVector::new(entries, dim).expect("valid entries")
}

pub fn random_instance<R: Rng>(rng: &mut R, id: &str, dim_ctx: usize, dim_resp: usize, responses: usize) -> CrfInstance {
    CrfInstance {
        snippet_id: id.to_string(),
        context: random_vector(rng, dim_ctx, 0.5),
        responses: (0..responses).map(|_| random_vector(rng, dim_resp, 0.5)).collect(),
    }
}

pub fn random_assignment<R: Rng>(rng: &mut R, responses: usize, with_strategy: bool) -> Assignment {
    Assignment {
        i: rng.random_range(0..NI),
        d: rng.random_range(0..ND),
        r: (0..responses).map(|_| rng.random_range(0..NR)).collect(),
        b: with_strategy.then(|| (0..responses).map(|_| rng.random_range(0..NB)).collect()),
    }
}
