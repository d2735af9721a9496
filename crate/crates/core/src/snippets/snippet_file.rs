use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Comment, Snippet, SnippetLabels};
use crate::{Error, Result};

/// One line of a snippet file: the snippet plus optional gold labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnippetRecord {
    pub snippet_id: String,
    pub parent: Comment,
    pub suspect: Comment,
    pub responses: Vec<Comment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<SnippetLabels>,
}

impl SnippetRecord {
    pub fn new(snippet: Snippet, labels: Option<SnippetLabels>) -> Self {
        SnippetRecord {
            snippet_id: snippet.snippet_id,
            parent: snippet.parent,
            suspect: snippet.suspect,
            responses: snippet.responses,
            labels,
        }
    }

    pub fn snippet(&self) -> Snippet {
        Snippet {
            snippet_id: self.snippet_id.clone(),
            parent: self.parent.clone(),
            suspect: self.suspect.clone(),
            responses: self.responses.clone(),
        }
    }
}

/// Reads snippet records, skipping blank and `#` lines. Records without
/// responses are rejected.
pub fn read_snippets_from<R: BufRead>(reader: R) -> Result<Vec<SnippetRecord>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Record {
            line: line_no,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let record: SnippetRecord = serde_json::from_str(trimmed).map_err(|e| Error::Record {
            line: line_no,
            message: e.to_string(),
        })?;
        if record.responses.is_empty() {
            return Err(Error::Record {
                line: line_no,
                message: format!("snippet `{}` has no responses", record.snippet_id),
            });
        }
        out.push(record);
    }
    Ok(out)
}

pub fn read_snippets(path: &Path) -> Result<Vec<SnippetRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_snippets_from(BufReader::new(file))
}

/// Writes one JSON record per line after an optional header line.
pub fn write_snippets<W: Write>(
    mut writer: W,
    header: Option<&str>,
    records: &[SnippetRecord],
) -> std::io::Result<()> {
    if let Some(h) = header {
        writeln!(writer, "{h}")?;
    }
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writeln!(writer)?;
    }
    Ok(())
}
