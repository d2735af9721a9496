use std::fmt;

use super::{DisclosureLabel, IntentionLabel, Snippet, SnippetLabels};

/// A failed snippet or label invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `responses` labels do not match the number of responses.
    ResponseCount { expected: usize, actual: usize },
    /// Exactly one of intention and disclosure is `none`.
    IntentionDisclosure {
        intention: IntentionLabel,
        disclosure: DisclosureLabel,
    },
    /// The suspect does not reply to the parent.
    SuspectNotChild,
    /// A response does not reply to the suspect.
    ResponseNotChild { index: usize },
    /// The parent's author is not among the responders.
    ParentNotResponder,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ResponseCount { expected, actual } => {
                write!(f, "{actual} response labels for {expected} responses")
            }
            Violation::IntentionDisclosure {
                intention,
                disclosure,
            } => write!(
                f,
                "intention `{intention}` is inconsistent with disclosure `{disclosure}`"
            ),
            Violation::SuspectNotChild => f.write_str("suspect does not reply to parent"),
            Violation::ResponseNotChild { index } => {
                write!(f, "response {index} does not reply to suspect")
            }
            Violation::ParentNotResponder => f.write_str("parent author is not a responder"),
        }
    }
}

/// Structural and label consistency checks. Empty means valid.
pub fn validate_labels(snippet: &Snippet, labels: &SnippetLabels) -> Vec<Violation> {
    let mut out = Vec::new();
    if snippet.suspect.parent_id.as_deref() != Some(snippet.parent.id.as_str()) {
        out.push(Violation::SuspectNotChild);
    }
    for (index, r) in snippet.responses.iter().enumerate() {
        if r.parent_id.as_deref() != Some(snippet.suspect.id.as_str()) {
            out.push(Violation::ResponseNotChild { index });
        }
    }
    if !snippet
        .responses
        .iter()
        .any(|r| r.author == snippet.parent.author)
    {
        out.push(Violation::ParentNotResponder);
    }
    if labels.per_response.len() != snippet.responses.len() {
        out.push(Violation::ResponseCount {
            expected: snippet.responses.len(),
            actual: labels.per_response.len(),
        });
    }
    let no_intent = labels.intention == IntentionLabel::None;
    let no_disclosure = labels.disclosure == DisclosureLabel::None;
    if no_intent != no_disclosure {
        out.push(Violation::IntentionDisclosure {
            intention: labels.intention,
            disclosure: labels.disclosure,
        });
    }
    out
}

/// Label combinations that are allowed but worth a second look: a playful
/// intention paired with a hidden or exposed disclosure.
pub fn label_warnings(labels: &SnippetLabels) -> Vec<String> {
    let mut out = Vec::new();
    if labels.intention == IntentionLabel::Playing && labels.disclosure != DisclosureLabel::None {
        out.push(format!(
            "intention `playing` with disclosure `{}`",
            labels.disclosure
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snippets::{Comment, InterpretationLabel, ResponseLabels, StrategyLabel};

    fn snippet() -> Snippet {
        let c = |id: &str, parent: Option<&str>, author: &str| Comment {
            id: id.into(),
            parent_id: parent.map(Into::into),
            thread_id: "t".into(),
            author: author.into(),
            body: "x".into(),
            created_utc: 0,
        };
        Snippet {
            snippet_id: "c1".into(),
            parent: c("c0", None, "C0"),
            suspect: c("c1", Some("c0"), "C1"),
            responses: vec![c("c2", Some("c1"), "C0")],
        }
    }

    fn labels(i: IntentionLabel, d: DisclosureLabel, n: usize) -> SnippetLabels {
        SnippetLabels {
            intention: i,
            disclosure: d,
            per_response: vec![
                ResponseLabels {
                    interpretation: InterpretationLabel::Trolling,
                    strategy: StrategyLabel::Frustrate,
                };
                n
            ],
        }
    }

    #[test]
    fn example_one_labels_are_valid() {
        let l = labels(IntentionLabel::Trolling, DisclosureLabel::Exposed, 1);
        assert!(validate_labels(&snippet(), &l).is_empty());
    }

    #[test]
    fn none_intention_with_hidden_disclosure() {
        let l = labels(IntentionLabel::None, DisclosureLabel::Hidden, 1);
        assert_eq!(
            validate_labels(&snippet(), &l),
            [Violation::IntentionDisclosure {
                intention: IntentionLabel::None,
                disclosure: DisclosureLabel::Hidden
            }]
        );
    }

    #[test]
    fn response_count_mismatch() {
        let l = labels(IntentionLabel::Trolling, DisclosureLabel::Hidden, 2);
        assert_eq!(
            validate_labels(&snippet(), &l),
            [Violation::ResponseCount {
                expected: 1,
                actual: 2
            }]
        );
    }

    #[test]
    fn structural_checks() {
        let mut s = snippet();
        s.responses[0].parent_id = Some("c0".into());
        s.responses[0].author = "other".into();
        let v = validate_labels(&s, &labels(IntentionLabel::Trolling, DisclosureLabel::Hidden, 1));
        assert_eq!(
            v,
            [
                Violation::ResponseNotChild { index: 0 },
                Violation::ParentNotResponder
            ]
        );
    }

    #[test]
    fn playing_with_disclosure_is_a_warning_only() {
        let l = labels(IntentionLabel::Playing, DisclosureLabel::Exposed, 1);
        assert!(validate_labels(&snippet(), &l).is_empty());
        assert_eq!(label_warnings(&l).len(), 1);
    }
}
