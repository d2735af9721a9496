//! Comments, conversation trees, snippets and the four-aspect label scheme.

mod ingest;
mod labels;
mod mine;
mod snippet_file;
mod tree;
mod validate;

use serde::{Deserialize, Serialize};

pub use ingest::{parse_comment_dump, read_comment_dump, DumpParse, RecordError, DELETED_MARKER};
pub use labels::{
    DisclosureLabel, IntentionLabel, InterpretationLabel, Label, ResponseLabels, SnippetLabels,
    StrategyLabel, Task,
};
pub use mine::{extract_snippet, find_suspects, levenshtein, mine_snippets, MineSummary, Rejection};
pub use snippet_file::{read_snippets, read_snippets_from, write_snippets, SnippetRecord};
pub use tree::{build_trees, ConversationTree};
pub use validate::{label_warnings, validate_labels, Violation};

/// One forum comment. Serializes with the dump field names, so the thread id
/// is `link_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    #[serde(default)]
    pub parent_id: Option<String>,
    #[serde(rename = "link_id")]
    pub thread_id: String,
    #[serde(default)]
    pub author: String,
    pub body: String,
    #[serde(default)]
    pub created_utc: i64,
}

/// Parent, suspect and every direct response of the suspect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub snippet_id: String,
    pub parent: Comment,
    pub suspect: Comment,
    pub responses: Vec<Comment>,
}

impl Snippet {
    pub fn response_count(&self) -> usize {
        self.responses.len()
    }
}
