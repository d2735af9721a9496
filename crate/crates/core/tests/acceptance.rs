//! Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exits nonzero
//! if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trollgraph::crf::oracle::{brute_force, max_deviation};
use trollgraph::crf::{
    build_snippet_graph, crf_dataset, infer_exact, random_instance, random_params, CrfParams, CrfProblem, CrfTasks,
    Layout, NB, NI, NR, ND,
};
use trollgraph::eval::{
    check_leakage, class_distribution, corpus_stats, evaluate_labels, fleiss_kappa, make_folds, report, run_cv,
    AnnotationTable, CvConfig, SHARE_THRESHOLD,
};
use trollgraph::features::{FeatureSet, SidecarIndex, SnippetFeatures, SparseVector};
use trollgraph::lexicons::LexiconSet;
use trollgraph::models::{labeled_features, predict_all, train_model, CrfVocabularies, ModelKind, TrainConfig};
use trollgraph::optim::{
    finite_difference_gradient, logreg_objective, minimize, relative_error, LogRegProblem, LogRegWeights,
    ObjectiveEvaluation, OptimConfig,
};
use trollgraph::snippets::{read_snippets, validate_labels, SnippetLabels, Task};
use trollgraph::synth::{planted_dataset, SynthConfig};

const INFERENCE_TOL: f64 = 1e-8;
const INFERENCE_BUDGET: Duration = Duration::from_secs(10);
const FD_STEP: f64 = 1e-5;
const GRADIENT_TOL: f64 = 1e-5;
const CLOSED_FORM_TOL: f64 = 1e-12;
const OPTIM_TOL: f64 = 1e-6;
const ROSENBROCK_MAX_ITER: usize = 500;
const TRAIN_ACCURACY: f64 = 0.99;
const CV_MARGIN: f64 = 0.02;
const END_TO_END_BUDGET: Duration = Duration::from_secs(60);
const CONSISTENCY_TOL: f64 = 1e-9;
const KAPPA_TOL: f64 = 1e-12;
const SHARE_TOL_PP: f64 = 0.5;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::{Fail, Pass, Skip};

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn planted() -> Vec<(SnippetFeatures, SnippetLabels)> {
    let records = planted_dataset(&SynthConfig::default());
    labeled_features(&records, None, &LexiconSet::bundled(), FeatureSet::Basic).unwrap()
}

fn c1_inference_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut map_mismatch = 0;
    for t in 0..200 {
        let params = random_params(&mut rng, CrfTasks::All, 6, 5, 2.0);
        let x = random_instance(&mut rng, "a", 6, 5, 1 + t % 3);
        let g = build_snippet_graph(&x, &params).unwrap();
        let (dev, same) = max_deviation(&infer_exact(&g), &brute_force(&g));
        worst = worst.max(dev);
        map_mismatch += usize::from(!same);
    }
    let took = start.elapsed();
    check(
        worst <= INFERENCE_TOL && map_mismatch == 0 && took < INFERENCE_BUDGET,
        format!("max deviation {worst:.2e}, MAP mismatches {map_mismatch}, {:.2}s", took.as_secs_f64()),
    )
}

fn c2_gradient_oracle() -> Outcome {
    let data: Vec<_> = planted().into_iter().take(5).collect();
    let vocabs = CrfVocabularies::build(&data, 1).unwrap();
    let (feats, labels): (Vec<_>, Vec<_>) = data.iter().cloned().unzip();
    let instances: Vec<_> = feats.iter().map(|f| vocabs.instance(f)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for tasks in [CrfTasks::All, CrfTasks::Idr] {
        let set = crf_dataset(instances.clone(), &labels, tasks).unwrap();
        let layout = Layout::new(tasks, vocabs.context.dimension(), vocabs.response.dimension());
        let problem = CrfProblem::new(&set, &layout, 0.1).unwrap();
        for _ in 0..3 {
            let p: Vec<f64> = (0..layout.len).map(|_| rng.random_range(-0.5..=0.5)).collect();
            let numeric = finite_difference_gradient(|q| problem.evaluate(q).value, &p, FD_STEP);
            worst = worst.max(relative_error(&problem.evaluate(&p).gradient, &numeric));
        }
    }
    let crf = worst;
    let xs: Vec<SparseVector> = instances.iter().map(|x| x.context.clone()).collect();
    let ys: Vec<usize> = labels.iter().map(|l| Task::Intention.instances(l)[0]).collect();
    let problem = LogRegProblem::new(&xs, &ys, NI, 0.1).unwrap();
    let mut lr: f64 = 0.0;
    for _ in 0..3 {
        let p: Vec<f64> = (0..problem.n_params()).map(|_| rng.random_range(-0.5..=0.5)).collect();
        let numeric = finite_difference_gradient(|q| problem.evaluate(q).value, &p, FD_STEP);
        lr = lr.max(relative_error(&problem.evaluate(&p).gradient, &numeric));
    }
    check(
        crf < GRADIENT_TOL && lr < GRADIENT_TOL,
        format!("CRF relative error {crf:.2e}, logreg {lr:.2e}"),
    )
}

fn c3_closed_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let zero = CrfParams::zeros(CrfTasks::All, 6, 5);
    let mut worst: f64 = 0.0;
    for r in 1..=4 {
        let x = random_instance(&mut rng, "z", 6, 5, r);
        let g = build_snippet_graph(&x, &zero).unwrap();
        let expected = ((NI * ND) as f64).ln() + r as f64 * ((NR * NB) as f64).ln();
        worst = worst.max((infer_exact(&g).log_z - expected).abs());
    }
    let n = 17;
    let xs: Vec<SparseVector> = (0..n).map(|_| trollgraph::crf::random_vector(&mut rng, 8, 0.5)).collect();
    let ys: Vec<usize> = (0..n).map(|i| i % 4).collect();
    let w = LogRegWeights::zeros(vec!["a".into(), "b".into(), "c".into(), "d".into()], 8);
    let value = logreg_objective(&xs, &ys, &w, 0.0).unwrap().value;
    let lr = (value - n as f64 * 4f64.ln()).abs();
    check(
        worst <= CLOSED_FORM_TOL && lr <= CLOSED_FORM_TOL,
        format!("max |logZ − log(9·42^R)| {worst:.1e} (R=1..4), |f − N log K| {lr:.1e}"),
    )
}

fn c4_optimizer() -> Outcome {
    let rosenbrock = |p: &[f64]| {
        let (x, y) = (p[0], p[1]);
        ObjectiveEvaluation {
            value: (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2),
            gradient: vec![-2.0 * (1.0 - x) - 400.0 * x * (y - x * x), 200.0 * (y - x * x)],
        }
    };
    let cfg = OptimConfig {
        gradient_tolerance: 1e-10,
        ..Default::default()
    };
    let m = minimize(rosenbrock, vec![-1.2, 1.0], &cfg).unwrap();
    let dist = ((m.x[0] - 1.0).powi(2) + (m.x[1] - 1.0).powi(2)).sqrt();
    let ros_ok = dist <= OPTIM_TOL && m.iterations <= ROSENBROCK_MAX_ITER;

    // f(x) = Σ c_j (x_j − j)², minimized at x_j = j.
    let quad = |p: &[f64]| {
        let mut value = 0.0;
        let mut gradient = vec![0.0; p.len()];
        for (j, x) in p.iter().enumerate() {
            let c = 1.0 + j as f64;
            value += c * (x - j as f64).powi(2);
            gradient[j] = 2.0 * c * (x - j as f64);
        }
        ObjectiveEvaluation { value, gradient }
    };
    let q = minimize(quad, vec![5.0; 8], &cfg).unwrap();
    let monotone = q.trace.windows(2).all(|w| w[1] <= w[0]);
    let q_err = q.x.iter().enumerate().map(|(j, x)| (x - j as f64).abs()).fold(0.0, f64::max);
    check(
        ros_ok && q.converged && monotone && q_err <= OPTIM_TOL,
        format!(
            "Rosenbrock {} iterations, distance {dist:.1e}; quadratic converged={} monotone={monotone} error {q_err:.1e}",
            m.iterations, q.converged
        ),
    )
}

fn accuracies(kind: ModelKind, data: &[(SnippetFeatures, SnippetLabels)]) -> Vec<f64> {
    let model = train_model(kind, data, &TrainConfig::default()).unwrap();
    let (f, y): (Vec<_>, Vec<_>) = data.iter().cloned().unzip();
    let pred = predict_all(&model, &f).unwrap();
    evaluate_labels(&y, &pred).unwrap().iter().map(|m| m.accuracy).collect()
}

fn c5_synthetic_end_to_end() -> Outcome {
    let start = Instant::now();
    let data = planted();
    let mut ok = true;
    let mut detail = Vec::new();
    for kind in ModelKind::ALL {
        let acc = accuracies(kind, &data);
        let min = acc.iter().cloned().fold(1.0, f64::min);
        ok &= min >= TRAIN_ACCURACY;
        detail.push(format!("{kind} train min {min:.3}"));
    }
    let cv = CvConfig::default();
    let test: BTreeMap<ModelKind, Vec<f64>> = ModelKind::ALL
        .iter()
        .map(|&k| (k, run_cv(k, &data, &cv).unwrap().metrics.iter().map(|m| m.accuracy).collect()))
        .collect();
    let base = &test[&ModelKind::Baseline];
    for kind in [ModelKind::Joint, ModelKind::Hybrid] {
        let worst_gap = test[&kind].iter().zip(base).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
        ok &= worst_gap >= -CV_MARGIN;
        detail.push(format!("{kind} CV gap {worst_gap:+.3}"));
    }
    let took = start.elapsed();
    ok &= took < END_TO_END_BUDGET;
    detail.push(format!("{:.1}s", took.as_secs_f64()));
    check(ok, detail.join(", "))
}

fn c6_two_pass_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    for s in 0..50 {
        let mut full = random_params(&mut rng, CrfTasks::All, 6, 5, 2.0);
        full.strategy.as_mut().unwrap().weights.iter_mut().for_each(|w| *w = 0.0);
        full.strategy.as_mut().unwrap().bias.iter_mut().for_each(|w| *w = 0.0);
        full.t_rb = Some([[0.0; NB]; NR]);
        let idr = CrfParams {
            tasks: CrfTasks::Idr,
            strategy: None,
            t_rb: None,
            ..full.clone()
        };
        let x = random_instance(&mut rng, &format!("c{s}"), 6, 5, 1 + s % 4);
        let a = infer_exact(&build_snippet_graph(&x, &full).unwrap());
        let b = infer_exact(&build_snippet_graph(&x, &idr).unwrap());
        let mut dev = |u: &[f64], v: &[f64]| {
            for (p, q) in u.iter().zip(v) {
                worst = worst.max((p - q).abs());
            }
        };
        dev(&a.p_i, &b.p_i);
        dev(&a.p_d, &b.p_d);
        dev(a.p_r.as_flattened(), b.p_r.as_flattened());
        for k in 0..x.responses.len() {
            dev(a.p_ir[k].as_flattened(), b.p_ir[k].as_flattened());
            dev(a.p_dr[k].as_flattened(), b.p_dr[k].as_flattened());
        }
    }
    check(worst <= CONSISTENCY_TOL, format!("max marginal difference {worst:.1e} over 50 snippets"))
}

fn table(counts: Vec<Vec<usize>>) -> AnnotationTable {
    AnnotationTable {
        aspect: "a".into(),
        items: (0..counts.len()).map(|i| i.to_string()).collect(),
        categories: (0..counts[0].len()).map(|i| i.to_string()).collect(),
        raters: counts[0].iter().sum(),
        counts,
    }
}

fn c7_kappa() -> Outcome {
    let perfect = fleiss_kappa(&table(vec![vec![3, 0, 0], vec![0, 3, 0], vec![0, 0, 3]])).unwrap();
    let hand = fleiss_kappa(&table(vec![vec![3, 0], vec![2, 1]])).unwrap();
    check(
        perfect == 1.0 && (hand + 0.2).abs() <= KAPPA_TOL,
        format!("perfect {perfect}, hand example {hand:.15}"),
    )
}

fn c8_protocol_fidelity() -> Outcome {
    let data = planted();
    let cv = CvConfig::default();
    let out = run_cv(ModelKind::Joint, &data, &cv).unwrap();
    let ids: Vec<String> = data.iter().map(|(f, _)| f.snippet_id.clone()).collect();
    let plan = make_folds(&ids, cv.k, cv.seed, cv.tune_fold).unwrap();

    // Snippet-level: every snippet in exactly one fold, all its responses
    // travel with it.
    let snippet_level = plan.assignment.len() == ids.len() && plan == out.plan;
    let leakage_ok = check_leakage(&out.plan, &out.audits).is_ok();
    let tune_size = out.plan.sizes()[cv.tune_fold];
    let reported = out.metrics[0].instances == ids.len() - tune_size
        && out.predictions.iter().all(|(fold, _)| *fold != cv.tune_fold);

    // A fold that trains on a tune-fold snippet must be caught.
    let mut tampered = out.audits.clone();
    let tune_id = ids.iter().find(|id| out.plan.fold_of(id) == Some(cv.tune_fold)).unwrap();
    tampered[0].train_ids.insert(tune_id.clone());
    let catches = check_leakage(&out.plan, &tampered).is_err();

    // Shares: engage 12.4%, imaginarybite 5.8% shown; a 4.9% class hidden.
    let mut shares = vec![0.0; NB];
    shares[8] = 0.124;
    shares[2] = 0.058;
    shares[1] = 0.049;
    shares[0] = 1.0 - 0.124 - 0.058 - 0.049;
    let mut dist = out.distribution.clone();
    dist.insert(Task::Strategy, shares);
    let rep = report("joint", "basic", &out.metrics, &dist, SHARE_THRESHOLD);
    let shown = |c: &str| rep.rows.iter().any(|r| r.task == Task::Strategy && r.class == c && r.shown);
    let text = rep.render_text();
    let suppress = SHARE_THRESHOLD == 0.05
        && shown("engage")
        && shown("imaginarybite")
        && !shown("biteattempt")
        && !text.contains("biteattempt")
        && rep.render_jsonl().contains("\"biteattempt\"");
    check(
        snippet_level && leakage_ok && reported && catches && suppress,
        format!(
            "snippet-level {snippet_level}, leakage check {leakage_ok}, tune fold excluded {reported}, tampering caught {catches}, <5% suppressed {suppress}"
        ),
    )
}

const REFERENCE_SHARES: [(Task, &str, f64); 16] = [
    (Task::Intention, "none", 55.7),
    (Task::Intention, "trolling", 41.7),
    (Task::Intention, "playing", 2.6),
    (Task::Disclosure, "none", 55.4),
    (Task::Disclosure, "hidden", 8.4),
    (Task::Disclosure, "exposed", 36.2),
    (Task::Interpretation, "none", 38.9),
    (Task::Interpretation, "trolling", 60.0),
    (Task::Interpretation, "playing", 1.1),
    (Task::Strategy, "engage", 12.4),
    (Task::Strategy, "falseaccusation", 14.4),
    (Task::Strategy, "neutralize", 15.7),
    (Task::Strategy, "normal", 18.4),
    (Task::Strategy, "frustrate", 9.9),
    (Task::Strategy, "imaginarybite", 5.8),
    (Task::Strategy, "biteattempt", 9.6),
];

fn c9_released_dataset() -> Outcome {
    let Some(path) = std::env::var_os("TROLLGRAPH_DATASET") else {
        return Skip("set TROLLGRAPH_DATASET to an annotated snippet file to run".into());
    };
    let records = read_snippets(Path::new(&path)).unwrap();
    let sidecars = std::env::var_os("TROLLGRAPH_SIDECARS").map(|p| SidecarIndex::load(Path::new(&p)).unwrap());
    let mut violations = 0;
    let mut labels = Vec::new();
    for r in &records {
        match &r.labels {
            Some(l) => {
                violations += validate_labels(&r.snippet(), l).len();
                labels.push(l.clone());
            }
            None => violations += 1,
        }
    }
    let mut worst: f64 = 0.0;
    for (task, class, pct) in REFERENCE_SHARES {
        let idx = task.class_names().iter().position(|c| *c == class).unwrap();
        let share = 100.0 * class_distribution(&labels, task)[idx];
        worst = worst.max((share - pct).abs());
    }
    let stats = corpus_stats(&records, sidecars.as_ref());
    let stats_ok = stats.conversations == 1000 && stats.sentences == 5868 && stats.tokens == 71033;
    check(
        violations == 0 && worst <= SHARE_TOL_PP && stats_ok,
        format!(
            "{violations} violations, max share gap {worst:.2} pp, {} conversations / {} sentences / {} tokens",
            stats.conversations, stats.sentences, stats.tokens
        ),
    )
}

fn c10_determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_trollgraph"))
            .args(["evaluate", "--synthetic", "--model", "hybrid", "--seed", "11", "--out"])
            .arg(d.path())
            .output()
            .unwrap()
            .status;
        if !status.success() {
            return Fail(format!("evaluate exited with {status}"));
        }
    }
    let same = ["report.txt", "report.jsonl"].iter().all(|f| {
        std::fs::read(dirs[0].path().join(f)).unwrap() == std::fs::read(dirs[1].path().join(f)).unwrap()
    });
    check(same, "report.txt and report.jsonl compared byte for byte".into())
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("inference oracle", c1_inference_oracle),
        ("gradient oracle", c2_gradient_oracle),
        ("uniform closed forms", c3_closed_forms),
        ("optimizer", c4_optimizer),
        ("synthetic end-to-end", c5_synthetic_end_to_end),
        ("two-pass consistency", c6_two_pass_consistency),
        ("fleiss kappa", c7_kappa),
        ("protocol fidelity", c8_protocol_fidelity),
        ("released dataset", c9_released_dataset),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Fail(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("criterion {:>2} {tag} {name}: {detail}", n + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
