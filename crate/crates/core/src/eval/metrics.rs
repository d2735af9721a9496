use serde::{Deserialize, Serialize};

use crate::snippets::{SnippetLabels, Task};
use crate::{Error, Result};

/// One-vs-rest scores of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold instances of the class.
    pub support: usize,
    pub predicted: usize,
    pub true_positives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics {
    pub task: Task,
    pub classes: Vec<ClassMetrics>,
    pub instances: usize,
    pub accuracy: f64,
}

impl TaskMetrics {
    /// Pooled recall over every class; equals accuracy.
    pub fn micro_recall(&self) -> f64 {
        let tp: usize = self.classes.iter().map(|c| c.true_positives).sum();
        let support: usize = self.classes.iter().map(|c| c.support).sum();
        tp as f64 / support as f64
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Per-class precision, recall and F1 of `task`. Undefined ratios are 0.
pub fn prf1(gold: &[usize], predicted: &[usize], task: Task) -> Result<TaskMetrics> {
    if gold.len() != predicted.len() {
        return Err(Error::Data(format!(
            "{} gold but {} predicted {} instances",
            gold.len(),
            predicted.len(),
            task
        )));
    }
    let k = task.class_count();
    if let Some(&bad) = gold.iter().chain(predicted).find(|&&c| c >= k) {
        return Err(Error::Label(format!("{task} class index {bad} out of range")));
    }
    let names = task.class_names();
    let mut correct = 0;
    let classes = (0..k)
        .map(|c| {
            let tp = gold.iter().zip(predicted).filter(|(g, p)| **g == c && **p == c).count();
            let support = gold.iter().filter(|&&g| g == c).count();
            let pred = predicted.iter().filter(|&&p| p == c).count();
            correct += tp;
            let (p, r) = (ratio(tp, pred), ratio(tp, support));
            ClassMetrics {
                class: names[c].to_string(),
                precision: p,
                recall: r,
                f1: if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 },
                support,
                predicted: pred,
                true_positives: tp,
            }
        })
        .collect();
    Ok(TaskMetrics {
        task,
        classes,
        instances: gold.len(),
        accuracy: ratio(correct, gold.len()),
    })
}

/// Metrics of all four tasks over paired gold and predicted snippets.
pub fn evaluate_labels(gold: &[SnippetLabels], predicted: &[SnippetLabels]) -> Result<Vec<TaskMetrics>> {
    if gold.len() != predicted.len() {
        return Err(Error::Data("gold and predicted snippet counts differ".into()));
    }
    Task::ALL
        .iter()
        .map(|&task| {
            let mut g = Vec::new();
            let mut p = Vec::new();
            for (a, b) in gold.iter().zip(predicted) {
                let (ga, pb) = (task.instances(a), task.instances(b));
                if ga.len() != pb.len() {
                    return Err(Error::Data(format!("response count mismatch for {task}")));
                }
                g.extend(ga);
                p.extend(pb);
            }
            prf1(&g, &p, task)
        })
        .collect()
}

/// Share of each class of `task` among all its instances in `labels`.
pub fn class_distribution(labels: &[SnippetLabels], task: Task) -> Vec<f64> {
    let mut counts = vec![0usize; task.class_count()];
    for l in labels {
        for c in task.instances(l) {
            counts[c] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    counts.iter().map(|&c| ratio(c, total)).collect()
}
