use serde::Serialize;

use crate::features::{tokenize, SidecarIndex};
use crate::snippets::{Comment, SnippetRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub conversations: usize,
    pub sentences: usize,
    pub tokens: usize,
}

/// Sentences by terminal punctuation: a run of `.`, `!` or `?` closes one,
/// and trailing text without it counts as one more.
fn count_sentences(text: &str) -> usize {
    let mut n = 0;
    let mut open = false;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            while chars.peek().is_some_and(|c| matches!(c, '.' | '!' | '?')) {
                chars.next();
            }
            if open {
                n += 1;
                open = false;
            }
        } else if c.is_alphanumeric() {
            open = true;
        }
    }
    n + usize::from(open)
}

fn comment_stats(c: &Comment, sidecars: Option<&SidecarIndex>) -> (usize, usize) {
    match sidecars.and_then(|s| s.get(&c.id)) {
        Some(ann) if !ann.tokens.is_empty() => {
            let mut ids: Vec<usize> = ann.tokens.iter().map(|t| t.sentence.unwrap_or(0)).collect();
            ids.dedup();
            (ids.len(), ann.tokens.len())
        }
        _ => (count_sentences(&c.body), tokenize(&c.body).len()),
    }
}

/// Conversations, sentences and tokens over every comment of every snippet.
/// Sidecar tokenization and sentence indices are used where available.
pub fn corpus_stats(records: &[SnippetRecord], sidecars: Option<&SidecarIndex>) -> CorpusStats {
    let mut s = CorpusStats {
        conversations: records.len(),
        ..Default::default()
    };
    for r in records {
        for c in [&r.parent, &r.suspect].into_iter().chain(&r.responses) {
            let (sent, tok) = comment_stats(c, sidecars);
            s.sentences += sent;
            s.tokens += tok;
        }
    }
    s
}
