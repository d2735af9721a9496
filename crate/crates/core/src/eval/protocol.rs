use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{make_folds, FoldPlan};
use super::metrics::{class_distribution, evaluate_labels, TaskMetrics};
use crate::features::SnippetFeatures;
use crate::models::{predict_all, train_model, ModelKind, PredictionRecord, TrainConfig};
use crate::snippets::{SnippetLabels, Task};
use crate::{Error, Result};

/// Cross-validation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub tune_fold: usize,
    pub l2_grid: Vec<f64>,
    pub min_count_grid: Vec<usize>,
    /// Base training settings; `l2` and `min_count` come from the grid.
    pub train: TrainConfig,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 5,
            seed: 0,
            tune_fold: 0,
            l2_grid: vec![0.01, 0.1, 1.0, 10.0],
            min_count_grid: vec![1],
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningPoint {
    pub l2: f64,
    pub min_count: usize,
    /// Mean over the four tasks of tune-fold accuracy.
    pub score: f64,
}

/// Ids a reporting fold trained and tested on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAudit {
    pub fold: usize,
    pub train_ids: BTreeSet<String>,
    pub test_ids: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub plan: FoldPlan,
    pub tuning: Vec<TuningPoint>,
    pub chosen: TuningPoint,
    /// Metrics over the pooled predictions of the reporting folds.
    pub metrics: Vec<TaskMetrics>,
    pub fold_metrics: Vec<(usize, Vec<TaskMetrics>)>,
    /// Held-out predictions of the reporting folds, in data order.
    pub predictions: Vec<(usize, PredictionRecord)>,
    /// Class shares over the whole dataset.
    pub distribution: BTreeMap<Task, Vec<f64>>,
    pub audits: Vec<FoldAudit>,
}

/// Audit, predictions, metrics and test set of one reporting fold.
type FoldRun = (FoldAudit, Vec<SnippetLabels>, Vec<TaskMetrics>, Vec<(SnippetFeatures, SnippetLabels)>);

fn mean_accuracy(metrics: &[TaskMetrics]) -> f64 {
    metrics.iter().map(|m| m.accuracy).sum::<f64>() / metrics.len() as f64
}

fn subset(data: &[(SnippetFeatures, SnippetLabels)], keep: impl Fn(&str) -> bool) -> Vec<(SnippetFeatures, SnippetLabels)> {
    data.iter().filter(|(f, _)| keep(&f.snippet_id)).cloned().collect()
}

fn train_and_score(
    kind: ModelKind,
    train: &[(SnippetFeatures, SnippetLabels)],
    test: &[(SnippetFeatures, SnippetLabels)],
    cfg: &TrainConfig,
) -> Result<(Vec<SnippetLabels>, Vec<TaskMetrics>)> {
    let model = train_model(kind, train, cfg)?;
    let feats: Vec<SnippetFeatures> = test.iter().map(|(f, _)| f.clone()).collect();
    let gold: Vec<SnippetLabels> = test.iter().map(|(_, y)| y.clone()).collect();
    let pred = predict_all(&model, &feats)?;
    let metrics = evaluate_labels(&gold, &pred)?;
    Ok((pred, metrics))
}

/// Fails if a reporting fold touched the tune fold or trained on its own
/// test snippets.
pub fn check_leakage(plan: &FoldPlan, audits: &[FoldAudit]) -> Result<()> {
    for a in audits {
        let tune = |id: &String| plan.fold_of(id) == Some(plan.tune_fold);
        if a.train_ids.iter().chain(&a.test_ids).any(tune) {
            return Err(Error::Data(format!("fold {} used tune-fold snippets", a.fold)));
        }
        if a.train_ids.intersection(&a.test_ids).next().is_some() {
            return Err(Error::Data(format!("fold {} trained on its test snippets", a.fold)));
        }
        if a.test_ids.iter().any(|id| plan.fold_of(id) != Some(a.fold)) {
            return Err(Error::Data(format!("fold {} tested outside its fold", a.fold)));
        }
    }
    Ok(())
}

/// Tunes `l2` and `min_count` on the tune fold (training on the other
/// folds), then reports cross-validation over the remaining folds with the
/// chosen values. The tune fold takes no part in reporting.
pub fn run_cv(kind: ModelKind, data: &[(SnippetFeatures, SnippetLabels)], cfg: &CvConfig) -> Result<CvOutcome> {
    if cfg.l2_grid.is_empty() || cfg.min_count_grid.is_empty() {
        return Err(Error::Config("empty tuning grid".into()));
    }
    let ids: Vec<String> = data.iter().map(|(f, _)| f.snippet_id.clone()).collect();
    let plan = make_folds(&ids, cfg.k, cfg.seed, cfg.tune_fold)?;
    let in_tune = |id: &str| plan.fold_of(id) == Some(plan.tune_fold);

    let grid: Vec<(f64, usize)> = cfg
        .l2_grid
        .iter()
        .flat_map(|&l2| cfg.min_count_grid.iter().map(move |&m| (l2, m)))
        .collect();
    let tune_train = subset(data, |id| !in_tune(id));
    let tune_test = subset(data, in_tune);
    let tuning: Vec<TuningPoint> = grid
        .par_iter()
        .map(|&(l2, min_count)| {
            let tc = TrainConfig {
                l2,
                min_count,
                ..cfg.train.clone()
            };
            let (_, m) = train_and_score(kind, &tune_train, &tune_test, &tc)?;
            Ok(TuningPoint {
                l2,
                min_count,
                score: mean_accuracy(&m),
            })
        })
        .collect::<Result<_>>()?;
    // First grid point wins ties.
    let chosen = tuning
        .iter()
        .fold(None::<&TuningPoint>, |best, p| match best {
            Some(b) if b.score >= p.score => Some(b),
            _ => Some(p),
        })
        .expect("nonempty grid")
        .clone();

    let train_cfg = TrainConfig {
        l2: chosen.l2,
        min_count: chosen.min_count,
        ..cfg.train.clone()
    };
    let folds = plan.report_folds();
    let results: Vec<FoldRun> = folds
        .par_iter()
        .map(|&fold| {
            let train = subset(data, |id| !in_tune(id) && plan.fold_of(id) != Some(fold));
            let test = subset(data, |id| plan.fold_of(id) == Some(fold));
            let audit = FoldAudit {
                fold,
                train_ids: train.iter().map(|(f, _)| f.snippet_id.clone()).collect(),
                test_ids: test.iter().map(|(f, _)| f.snippet_id.clone()).collect(),
            };
            let (pred, m) = train_and_score(kind, &train, &test, &train_cfg)?;
            Ok((audit, pred, m, test))
        })
        .collect::<Result<_>>()?;

    let audits: Vec<FoldAudit> = results.iter().map(|r| r.0.clone()).collect();
    check_leakage(&plan, &audits)?;

    let mut by_id: BTreeMap<String, (usize, SnippetLabels)> = BTreeMap::new();
    for (audit, pred, _, test) in &results {
        for ((f, _), p) in test.iter().zip(pred) {
            by_id.insert(f.snippet_id.clone(), (audit.fold, p.clone()));
        }
    }
    let mut predictions = Vec::new();
    let mut gold = Vec::new();
    let mut pooled = Vec::new();
    for (f, y) in data {
        if let Some((fold, p)) = by_id.remove(&f.snippet_id) {
            gold.push(y.clone());
            pooled.push(p.clone());
            predictions.push((
                fold,
                PredictionRecord {
                    snippet_id: f.snippet_id.clone(),
                    labels: p,
                },
            ));
        }
    }
    let metrics = evaluate_labels(&gold, &pooled)?;
    let all_labels: Vec<SnippetLabels> = data.iter().map(|(_, y)| y.clone()).collect();
    let distribution = Task::ALL
        .iter()
        .map(|&t| (t, class_distribution(&all_labels, t)))
        .collect();
    Ok(CvOutcome {
        plan,
        tuning,
        chosen,
        metrics,
        fold_metrics: results.into_iter().map(|r| (r.0.fold, r.2)).collect(),
        predictions,
        distribution,
        audits,
    })
}
