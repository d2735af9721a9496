use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::Comment;
use crate::{Error, Result};

/// Reply structure of one thread.
///
/// Children lists are ordered by `created_utc`, then id. A comment whose
/// parent is missing from the dump is a root, so partial threads survive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversationTree {
    pub thread_id: String,
    nodes: BTreeMap<String, Comment>,
    children: BTreeMap<String, Vec<String>>,
    roots: Vec<String>,
}

impl ConversationTree {
    pub fn get(&self, id: &str) -> Option<&Comment> {
        self.nodes.get(id)
    }

    pub fn roots(&self) -> &[String] {
        &self.roots
    }

    pub fn children(&self, id: &str) -> &[String] {
        self.children.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Parent comment, if `id` is not a root.
    pub fn parent(&self, id: &str) -> Option<&Comment> {
        if self.roots.iter().any(|r| r == id) {
            return None;
        }
        self.nodes
            .get(id)?
            .parent_id
            .as_deref()
            .and_then(|p| self.nodes.get(p))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Depth-first pre-order walk from each root in turn.
    pub fn preorder(&self) -> Vec<&Comment> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack: Vec<&str> = self.roots.iter().rev().map(String::as_str).collect();
        while let Some(id) = stack.pop() {
            out.push(&self.nodes[id]);
            stack.extend(self.children(id).iter().rev().map(String::as_str));
        }
        out
    }

    /// Number of comments on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack: Vec<(&str, usize)> = self.roots.iter().map(|r| (r.as_str(), 1)).collect();
        while let Some((id, d)) = stack.pop() {
            best = best.max(d);
            stack.extend(self.children(id).iter().map(|c| (c.as_str(), d + 1)));
        }
        best
    }
}

fn order_key(c: &Comment) -> (i64, &str) {
    (c.created_utc, c.id.as_str())
}

/// Groups comments by thread and links replies to their parents.
///
/// Trees come out in order of each thread's first appearance in `comments`.
/// Reply cycles (possible only in corrupt dumps) are broken by promoting the
/// earliest comment of the cycle to a root.
pub fn build_trees(comments: Vec<Comment>) -> Result<Vec<ConversationTree>> {
    let mut order: Vec<String> = Vec::new();
    let mut by_thread: HashMap<String, Vec<Comment>> = HashMap::new();
    for c in comments {
        if !by_thread.contains_key(&c.thread_id) {
            order.push(c.thread_id.clone());
        }
        by_thread.entry(c.thread_id.clone()).or_default().push(c);
    }
    order
        .into_iter()
        .map(|thread_id| {
            let comments = by_thread.remove(&thread_id).unwrap_or_default();
            build_one(thread_id, comments)
        })
        .collect()
}

fn build_one(thread_id: String, comments: Vec<Comment>) -> Result<ConversationTree> {
    let mut nodes = BTreeMap::new();
    for c in comments {
        if nodes.contains_key(&c.id) {
            return Err(Error::DuplicateId {
                thread_id,
                id: c.id,
            });
        }
        nodes.insert(c.id.clone(), c);
    }

    let mut children: BTreeMap<String, Vec<String>> =
        nodes.keys().map(|id| (id.clone(), Vec::new())).collect();
    let mut roots = Vec::new();
    for c in nodes.values() {
        match c.parent_id.as_deref() {
            Some(p) if p != c.id && nodes.contains_key(p) => {
                children.get_mut(p).expect("parent present").push(c.id.clone())
            }
            _ => roots.push(c.id.clone()),
        }
    }

    let mut reached = BTreeSet::new();
    mark_reachable(&roots, &children, &mut reached);
    while reached.len() < nodes.len() {
        let promoted = nodes
            .values()
            .filter(|c| !reached.contains(&c.id))
            .min_by(|a, b| order_key(a).cmp(&order_key(b)))
            .map(|c| c.id.clone())
            .expect("unreached node exists");
        let parent = nodes[&promoted].parent_id.clone().expect("cycle member has parent");
        children
            .get_mut(&parent)
            .expect("parent present")
            .retain(|c| c != &promoted);
        roots.push(promoted.clone());
        mark_reachable(std::slice::from_ref(&promoted), &children, &mut reached);
    }

    let key = |id: &String| order_key(&nodes[id]);
    roots.sort_by(|a, b| key(a).cmp(&key(b)));
    for list in children.values_mut() {
        list.sort_by(|a, b| key(a).cmp(&key(b)));
    }

    Ok(ConversationTree {
        thread_id,
        nodes,
        children,
        roots,
    })
}

fn mark_reachable(
    start: &[String],
    children: &BTreeMap<String, Vec<String>>,
    reached: &mut BTreeSet<String>,
) {
    let mut queue: VecDeque<&String> = start.iter().collect();
    while let Some(id) = queue.pop_front() {
        if reached.insert(id.clone()) {
            queue.extend(children[id].iter());
        }
    }
}
