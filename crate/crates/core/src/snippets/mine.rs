use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{ConversationTree, Snippet};
use crate::text::normalized_tokens;

/// Unit-cost Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn mentions(body: &str, keyword: &str, max_edit: usize) -> bool {
    let klen = keyword.chars().count();
    normalized_tokens(body).iter().any(|tok| {
        tok.chars().count().abs_diff(klen) <= max_edit && levenshtein(tok, keyword) <= max_edit
    })
}

/// Comments with at least one direct reply containing a token within
/// `max_edit` edits of `keyword` (case-insensitive). Ids come out in tree
/// pre-order.
pub fn find_suspects(tree: &ConversationTree, keyword: &str, max_edit: usize) -> Vec<String> {
    let keyword = keyword.to_lowercase();
    tree.preorder()
        .into_iter()
        .filter(|c| {
            tree.children(&c.id).iter().any(|child| {
                tree.get(child)
                    .is_some_and(|child| mentions(&child.body, &keyword, max_edit))
            })
        })
        .map(|c| c.id.clone())
        .collect()
}

/// Why a suspect could not be turned into a snippet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rejection {
    /// The id is not in the tree.
    NotInTree,
    /// The suspect is a root.
    NoParent,
    /// Nobody replied to the suspect.
    NoResponses,
    /// The parent's author is not among the responders.
    ParentNotResponder,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rejection::NotInTree => "not-in-tree",
            Rejection::NoParent => "no-parent",
            Rejection::NoResponses => "no-responses",
            Rejection::ParentNotResponder => "parent-not-responder",
        };
        f.write_str(s)
    }
}

/// Builds the (parent, suspect, direct responses) snippet around `suspect_id`.
///
/// The parent's author must also reply to the suspect.
pub fn extract_snippet(tree: &ConversationTree, suspect_id: &str) -> Result<Snippet, Rejection> {
    let suspect = tree.get(suspect_id).ok_or(Rejection::NotInTree)?;
    let parent = tree.parent(suspect_id).ok_or(Rejection::NoParent)?;
    let responses: Vec<_> = tree
        .children(suspect_id)
        .iter()
        .filter_map(|id| tree.get(id))
        .cloned()
        .collect();
    if responses.is_empty() {
        return Err(Rejection::NoResponses);
    }
    if !responses.iter().any(|r| r.author == parent.author) {
        return Err(Rejection::ParentNotResponder);
    }
    Ok(Snippet {
        snippet_id: suspect.id.clone(),
        parent: parent.clone(),
        suspect: suspect.clone(),
        responses,
    })
}

#[derive(Debug, Default, Clone, Serialize)]
pub struct MineSummary {
    pub trees: usize,
    pub suspects: usize,
    pub snippets: usize,
    pub rejected: BTreeMap<String, usize>,
}

/// Runs suspect search and snippet extraction over every tree.
pub fn mine_snippets(
    trees: &[ConversationTree],
    keyword: &str,
    max_edit: usize,
) -> (Vec<Snippet>, MineSummary) {
    let mut summary = MineSummary {
        trees: trees.len(),
        ..Default::default()
    };
    let mut out = Vec::new();
    for tree in trees {
        for id in find_suspects(tree, keyword, max_edit) {
            summary.suspects += 1;
            match extract_snippet(tree, &id) {
                Ok(s) => out.push(s),
                Err(r) => *summary.rejected.entry(r.to_string()).or_default() += 1,
            }
        }
    }
    summary.snippets = out.len();
    (out, summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snippets::{build_trees, Comment};

    fn c(id: &str, parent: Option<&str>, author: &str, body: &str, t: i64) -> Comment {
        Comment {
            id: id.into(),
            parent_id: parent.map(Into::into),
            thread_id: "t".into(),
            author: author.into(),
            body: body.into(),
            created_utc: t,
        }
    }

    fn tree(comments: Vec<Comment>) -> ConversationTree {
        build_trees(comments).unwrap().remove(0)
    }

    #[test]
    fn levenshtein_hand_values() {
        assert_eq!(levenshtein("troll", "troll"), 0);
        assert_eq!(levenshtein("troll", "trolls"), 1);
        assert_eq!(levenshtein("troll", "trolley"), 2);
        assert_eq!(levenshtein("troll", "droll"), 1);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }

    #[test]
    fn suspects_by_edit_distance() {
        let t = tree(vec![
            c("p", None, "a", "root", 0),
            c("s1", Some("p"), "b", "first", 1),
            c("r1", Some("s1"), "a", "you're a troll, obviously", 2),
            c("s2", Some("p"), "b", "second", 3),
            c("r2", Some("s2"), "a", "Trolls everywhere", 4),
            c("s3", Some("p"), "b", "third", 5),
            c("r3", Some("s3"), "a", "on the trolley", 6),
        ]);
        assert_eq!(find_suspects(&t, "troll", 0), ["s1"]);
        assert_eq!(find_suspects(&t, "troll", 1), ["s1", "s2"]);
        assert_eq!(find_suspects(&t, "troll", 2), ["s1", "s2", "s3"]);
    }

    #[test]
    fn example_one_shape_extracts() {
        let t = tree(vec![
            c("c0", None, "C0", "At this point I think you're just trolling.", 0),
            c("c1", Some("c0"), "C1", "Did you grow up sheltered by any chance?", 1),
            c(
                "c2",
                Some("c1"),
                "C0",
                "Judging by your post history, you're indeed a troll. Have a good one.",
                2,
            ),
        ]);
        assert_eq!(find_suspects(&t, "troll", 1), ["c1"]);
        let s = extract_snippet(&t, "c1").unwrap();
        assert_eq!(s.parent.id, "c0");
        assert_eq!(s.suspect.id, "c1");
        assert_eq!(s.response_count(), 1);
    }

    #[test]
    fn rejections() {
        let t = tree(vec![
            c("c0", None, "A", "root", 0),
            c("c1", Some("c0"), "B", "suspect", 1),
            c("c2", Some("c1"), "C", "troll", 2),
            c("c3", Some("c0"), "B", "quiet", 3),
        ]);
        assert_eq!(extract_snippet(&t, "c0"), Err(Rejection::NoParent));
        assert_eq!(extract_snippet(&t, "c1"), Err(Rejection::ParentNotResponder));
        assert_eq!(extract_snippet(&t, "c3"), Err(Rejection::NoResponses));
        assert_eq!(extract_snippet(&t, "zz"), Err(Rejection::NotInTree));
    }
}
