//! Brute-force inference by enumerating every joint state. Exponential in
//! the number of responses; used to check [`super::infer_exact`].

use super::graph::{Assignment, InferenceResult, SnippetGraph};
use super::{NB, ND, NI, NR};

/// Visits every assignment in lexicographic order of (i, d, r_1, b_1, ...).
fn for_each_state<F: FnMut(&Assignment, f64)>(g: &SnippetGraph, mut visit: F) {
    let n = g.responses();
    let nb = if g.u_b.is_some() { NB } else { 1 };
    let per_response = NR * nb;
    let total_resp = per_response.pow(n as u32);
    let mut a = Assignment {
        i: 0,
        d: 0,
        r: vec![0; n],
        b: g.u_b.as_ref().map(|_| vec![0; n]),
    };
    for i in 0..NI {
        for d in 0..ND {
            a.i = i;
            a.d = d;
            for code in 0..total_resp {
                // Response 1 is the most significant digit.
                let mut c = code;
                for k in (0..n).rev() {
                    let digit = c % per_response;
                    c /= per_response;
                    a.r[k] = digit / nb;
                    if let Some(b) = a.b.as_mut() {
                        b[k] = digit % nb;
                    }
                }
                visit(&a, score(g, &a));
            }
        }
    }
}

fn score(g: &SnippetGraph, a: &Assignment) -> f64 {
    let mut s = g.u_i[a.i] + g.u_d[a.d];
    for k in 0..a.r.len() {
        let r = a.r[k];
        s += g.u_r[k][r] + g.t_ir[a.i][r] + g.t_dr[a.d][r];
        if let (Some(ub), Some(trb), Some(b)) = (&g.u_b, &g.t_rb, &a.b) {
            s += ub[k][b[k]] + trb[r][b[k]];
        }
    }
    s
}

/// Number of joint states of `g`.
pub fn state_count(g: &SnippetGraph) -> usize {
    let nb = if g.u_b.is_some() { NB } else { 1 };
    NI * ND * (NR * nb).pow(g.responses() as u32)
}

/// Exact inference by enumeration: one pass for the maximum (and MAP), one
/// for the normalizer and marginals.
pub fn brute_force(g: &SnippetGraph) -> InferenceResult {
    let n = g.responses();
    let mut max = f64::NEG_INFINITY;
    let mut map = None;
    for_each_state(g, |a, s| {
        if s > max {
            max = s;
            map = Some(a.clone());
        }
    });

    let mut z = 0.0;
    let mut p_i = [0.0; NI];
    let mut p_d = [0.0; ND];
    let mut p_r = vec![[0.0; NR]; n];
    let mut p_ir = vec![[[0.0; NR]; NI]; n];
    let mut p_dr = vec![[[0.0; NR]; ND]; n];
    let mut p_b = g.u_b.as_ref().map(|_| vec![[0.0; NB]; n]);
    let mut p_rb = g.u_b.as_ref().map(|_| vec![[[0.0; NB]; NR]; n]);
    for_each_state(g, |a, s| {
        let w = (s - max).exp();
        z += w;
        p_i[a.i] += w;
        p_d[a.d] += w;
        for k in 0..n {
            let r = a.r[k];
            p_r[k][r] += w;
            p_ir[k][a.i][r] += w;
            p_dr[k][a.d][r] += w;
            if let (Some(b), Some(pb), Some(prb)) = (&a.b, p_b.as_mut(), p_rb.as_mut()) {
                pb[k][b[k]] += w;
                prb[k][r][b[k]] += w;
            }
        }
    });

    let norm = |v: &mut [f64]| v.iter_mut().for_each(|x| *x /= z);
    norm(&mut p_i);
    norm(&mut p_d);
    for k in 0..n {
        norm(&mut p_r[k]);
        norm(p_ir[k].as_flattened_mut());
        norm(p_dr[k].as_flattened_mut());
        if let (Some(pb), Some(prb)) = (p_b.as_mut(), p_rb.as_mut()) {
            norm(&mut pb[k]);
            norm(prb[k].as_flattened_mut());
        }
    }

    InferenceResult {
        log_z: max + z.ln(),
        p_i,
        p_d,
        p_r,
        p_b,
        p_ir,
        p_dr,
        p_rb,
        map: map.expect("at least one state"),
    }
}

/// Largest absolute difference between two results over logZ and every
/// marginal entry, and whether the MAP assignments agree.
pub fn max_deviation(a: &InferenceResult, b: &InferenceResult) -> (f64, bool) {
    let mut dev = (a.log_z - b.log_z).abs();
    let mut take = |x: &[f64], y: &[f64]| {
        assert_eq!(x.len(), y.len());
        for (p, q) in x.iter().zip(y) {
            dev = dev.max((p - q).abs());
        }
    };
    take(&a.p_i, &b.p_i);
    take(&a.p_d, &b.p_d);
    take(a.p_r.as_flattened(), b.p_r.as_flattened());
    for (x, y) in a.p_ir.iter().zip(&b.p_ir) {
        take(x.as_flattened(), y.as_flattened());
    }
    for (x, y) in a.p_dr.iter().zip(&b.p_dr) {
        take(x.as_flattened(), y.as_flattened());
    }
    match (&a.p_b, &b.p_b) {
        (Some(x), Some(y)) => take(x.as_flattened(), y.as_flattened()),
        (None, None) => {}
        _ => return (f64::INFINITY, false),
    }
    match (&a.p_rb, &b.p_rb) {
        (Some(x), Some(y)) => {
            for (u, v) in x.iter().zip(y) {
                take(u.as_flattened(), v.as_flattened());
            }
        }
        (None, None) => {}
        _ => return (f64::INFINITY, false),
    }
    (dev, a.map == b.map)
}
