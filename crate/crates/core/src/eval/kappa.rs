use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Agreement values measured on the original annotation study, for
/// comparison only (the raw annotations were not released).
pub const REFERENCE_KAPPA: [(&str, f64); 4] = [
    ("intention", 0.578),
    ("disclosure", 0.556),
    ("interpretation", 0.731),
    ("strategy", 0.632),
];

/// Category counts per item for one aspect: `counts[item][category]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationTable {
    pub aspect: String,
    pub items: Vec<String>,
    pub categories: Vec<String>,
    pub counts: Vec<Vec<usize>>,
    pub raters: usize,
}

/// One row of an annotation file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRow {
    pub item: String,
    pub annotator: String,
    pub aspect: String,
    pub label: String,
}

impl AnnotationTable {
    /// Builds a table from `(item, annotator, label)` triples. Items and
    /// categories keep first-seen order.
    pub fn from_rows<'a, I>(aspect: &str, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str, &'a str)>,
    {
        let mut items: Vec<String> = Vec::new();
        let mut item_index: BTreeMap<String, usize> = BTreeMap::new();
        let mut categories: Vec<String> = Vec::new();
        let mut labels: Vec<BTreeMap<String, String>> = Vec::new();
        for (item, annotator, label) in rows {
            let idx = *item_index.entry(item.to_string()).or_insert_with(|| {
                items.push(item.to_string());
                labels.push(BTreeMap::new());
                items.len() - 1
            });
            if !categories.iter().any(|c| c == label) {
                categories.push(label.to_string());
            }
            if labels[idx].insert(annotator.to_string(), label.to_string()).is_some() {
                return Err(Error::Data(format!(
                    "{aspect}: annotator `{annotator}` labels `{item}` twice"
                )));
            }
        }
        if items.is_empty() {
            return Err(Error::Data(format!("{aspect}: no annotations")));
        }
        let raters = labels[0].len();
        if raters < 2 {
            return Err(Error::Data(format!("{aspect}: need at least 2 annotators per item")));
        }
        if let Some(i) = labels.iter().position(|l| l.len() != raters) {
            return Err(Error::Data(format!(
                "{aspect}: item `{}` has {} annotations, expected {raters}",
                items[i],
                labels[i].len()
            )));
        }
        let counts = labels
            .iter()
            .map(|l| {
                let mut row = vec![0; categories.len()];
                for v in l.values() {
                    row[categories.iter().position(|c| c == v).expect("seen category")] += 1;
                }
                row
            })
            .collect();
        Ok(AnnotationTable {
            aspect: aspect.to_string(),
            items,
            categories,
            counts,
            raters,
        })
    }
}

/// Fleiss' kappa of `table`.
pub fn fleiss_kappa(table: &AnnotationTable) -> Result<f64> {
    let n = table.raters as f64;
    let big_n = table.counts.len() as f64;
    if table.raters < 2 || table.counts.is_empty() {
        return Err(Error::Data("kappa needs at least one item and two raters".into()));
    }
    if table.counts.iter().any(|row| row.iter().sum::<usize>() != table.raters) {
        return Err(Error::Data("every item needs the same number of ratings".into()));
    }
    let k = table.counts[0].len();
    let p_bar = table
        .counts
        .iter()
        .map(|row| {
            let sq: f64 = row.iter().map(|&c| (c * c) as f64).sum();
            (sq - n) / (n * (n - 1.0))
        })
        .sum::<f64>()
        / big_n;
    let p_e: f64 = (0..k)
        .map(|j| {
            let pj = table.counts.iter().map(|row| row[j] as f64).sum::<f64>() / (big_n * n);
            pj * pj
        })
        .sum();
    if p_e == 1.0 {
        return if p_bar == 1.0 {
            Ok(1.0)
        } else {
            Err(Error::Data("kappa undefined: expected agreement is 1".into()))
        };
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Reads `snippet_id, annotator_id, aspect, label` rows. The delimiter is a
/// tab if the first line has one, otherwise a comma; a first row whose
/// last two fields are `aspect` and `label` is a header.
pub fn parse_annotations(text: &str) -> Result<Vec<AnnotationRow>> {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let delimiter = if first.contains('\t') { b'\t' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Record {
            line: n + 1,
            message: e.to_string(),
        })?;
        if record.len() != 4 {
            return Err(Error::Record {
                line: n + 1,
                message: format!("expected 4 fields, found {}", record.len()),
            });
        }
        if n == 0 && record[2].eq_ignore_ascii_case("aspect") && record[3].eq_ignore_ascii_case("label") {
            continue;
        }
        rows.push(AnnotationRow {
            item: record[0].to_string(),
            annotator: record[1].to_string(),
            aspect: record[2].to_string(),
            label: record[3].to_string(),
        });
    }
    Ok(rows)
}

/// One table per aspect, in first-seen aspect order.
pub fn annotation_tables(rows: &[AnnotationRow]) -> Result<Vec<AnnotationTable>> {
    let mut aspects: Vec<&str> = Vec::new();
    for r in rows {
        if !aspects.contains(&r.aspect.as_str()) {
            aspects.push(&r.aspect);
        }
    }
    aspects
        .iter()
        .map(|&a| {
            AnnotationTable::from_rows(
                a,
                rows.iter()
                    .filter(|r| r.aspect == a)
                    .map(|r| (r.item.as_str(), r.annotator.as_str(), r.label.as_str())),
            )
        })
        .collect()
}

pub fn read_annotations(path: &Path) -> Result<Vec<AnnotationTable>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    annotation_tables(&parse_annotations(&text)?)
}
