use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::TaskMetrics;
use crate::snippets::Task;

/// Strategy classes below this share of the distribution are left out of
/// the human-readable table.
pub const SHARE_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub features: String,
    pub task: Task,
    pub class: String,
    /// Share of the class in the whole dataset.
    pub size: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// Whether the row appears in the text table.
    pub shown: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub preamble: Vec<String>,
    pub rows: Vec<ReportRow>,
}

/// Rows for every class; strategy rows under `threshold` are marked hidden.
pub fn report(
    model: &str,
    features: &str,
    metrics: &[TaskMetrics],
    distribution: &BTreeMap<Task, Vec<f64>>,
    threshold: f64,
) -> Report {
    let mut rows = Vec::new();
    for m in metrics {
        let shares = distribution.get(&m.task);
        for (c, cm) in m.classes.iter().enumerate() {
            let size = shares.map_or(0.0, |s| s[c]);
            rows.push(ReportRow {
                model: model.to_string(),
                features: features.to_string(),
                task: m.task,
                class: cm.class.clone(),
                size,
                precision: cm.precision,
                recall: cm.recall,
                f1: cm.f1,
                support: cm.support,
                shown: m.task != Task::Strategy || size >= threshold,
            });
        }
    }
    Report {
        preamble: Vec::new(),
        rows,
    }
}

impl Report {
    pub fn with_preamble(mut self, lines: Vec<String>) -> Self {
        self.preamble = lines;
        self
    }

    /// Aligned plain-text table of the shown rows.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for l in &self.preamble {
            let _ = writeln!(out, "{l}");
        }
        if let Some(first) = self.rows.first() {
            let _ = writeln!(out, "model: {}  features: {}", first.model, first.features);
        }
        let _ = writeln!(
            out,
            "{:<16} {:<18} {:>7} {:>7} {:>7} {:>7} {:>8}",
            "task", "class", "size", "P", "R", "F1", "support"
        );
        let mut last_task = None;
        for r in self.rows.iter().filter(|r| r.shown) {
            if last_task.is_some() && last_task != Some(r.task) {
                let _ = writeln!(out);
            }
            last_task = Some(r.task);
            let _ = writeln!(
                out,
                "{:<16} {:<18} {:>6.1}% {:>7.3} {:>7.3} {:>7.3} {:>8}",
                r.task.name(),
                r.class,
                100.0 * r.size,
                r.precision,
                r.recall,
                r.f1,
                r.support
            );
        }
        out
    }

    /// One JSON record per row, hidden rows included.
    pub fn render_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&serde_json::to_string(r).expect("row serializes"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::prf1;

    #[test]
    fn strategy_rows_under_threshold_hidden_from_text_only() {
        let gold: Vec<usize> = (0..14).collect();
        let m = vec![
            prf1(&[0, 1, 2], &[0, 1, 2], Task::Intention).unwrap(),
            prf1(&gold, &gold, Task::Strategy).unwrap(),
        ];
        let mut shares = vec![0.0; 14];
        shares[0] = 0.5;
        shares[1] = 0.049;
        shares[2] = 0.05;
        shares[3] = 0.401;
        let dist = BTreeMap::from([
            (Task::Intention, vec![0.557, 0.417, 0.026]),
            (Task::Strategy, shares),
        ]);
        let r = report("joint", "basic", &m, &dist, SHARE_THRESHOLD);
        let text = r.render_text();
        assert!(!text.contains("biteattempt"));
        assert!(text.contains("imaginarybite"));
        assert!(text.contains(" 2.6%"), "{text}");
        assert!(text.contains("41.7%"));
        let jsonl = r.render_jsonl();
        assert_eq!(jsonl.lines().count(), 17);
        assert!(jsonl.contains("\"class\":\"biteattempt\""));
    }
}
