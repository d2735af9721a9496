use serde::{Deserialize, Serialize};

use crate::text::is_punct;

/// Emoticons the tokenizer always keeps whole, on top of any lexicon.
pub const DEFAULT_EMOTICONS: [&str; 10] =
    [":)", ":(", ":-)", ":-(", ":d", ";)", ":p", ":/", ":'(", "<3"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub lowered: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<String>,
    /// Sentence index; bigrams never span two sentences.
    #[serde(default)]
    pub sentence: usize,
}

impl Token {
    pub fn new(text: &str) -> Self {
        Token {
            text: text.to_string(),
            lowered: text.to_lowercase(),
            pos: None,
            lemma: None,
            sentence: 0,
        }
    }
}

/// Tokenizes with [`DEFAULT_EMOTICONS`] only.
pub fn tokenize(text: &str) -> Vec<Token> {
    tokenize_with(text, &[])
}

fn match_prefix<'a>(s: &str, emoticons: &[&'a str]) -> Option<&'a str> {
    emoticons
        .iter()
        .copied()
        .filter(|e| s.get(..e.len()).is_some_and(|p| p.eq_ignore_ascii_case(e)))
        .max_by_key(|e| e.len())
}

fn match_suffix<'a>(s: &str, emoticons: &[&'a str]) -> Option<&'a str> {
    emoticons
        .iter()
        .copied()
        .filter(|e| {
            s.len() >= e.len()
                && s.get(s.len() - e.len()..)
                    .is_some_and(|p| p.eq_ignore_ascii_case(e))
        })
        .max_by_key(|e| e.len())
}

/// Whitespace tokenization that splits leading and trailing punctuation into
/// single-character tokens, except for emoticons (from `extra_emoticons` or
/// [`DEFAULT_EMOTICONS`], matched case-insensitively) which stay whole.
pub fn tokenize_with(text: &str, extra_emoticons: &[&str]) -> Vec<Token> {
    let mut emoticons: Vec<&str> = DEFAULT_EMOTICONS.to_vec();
    emoticons.extend(extra_emoticons.iter().copied().filter(|e| !e.is_empty()));

    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        if emoticons.iter().any(|e| chunk.eq_ignore_ascii_case(e)) {
            out.push(Token::new(chunk));
            continue;
        }
        let mut rest = chunk;
        while let Some(first) = rest.chars().next() {
            if let Some(e) = match_prefix(rest, &emoticons) {
                out.push(Token::new(&rest[..e.len()]));
                rest = &rest[e.len()..];
            } else if is_punct(first) {
                out.push(Token::new(&rest[..first.len_utf8()]));
                rest = &rest[first.len_utf8()..];
            } else {
                break;
            }
        }
        let mut trailing = Vec::new();
        while let Some(last) = rest.chars().next_back() {
            if let Some(e) = match_suffix(rest, &emoticons) {
                let cut = rest.len() - e.len();
                trailing.push(Token::new(&rest[cut..]));
                rest = &rest[..cut];
            } else if is_punct(last) {
                let cut = rest.len() - last.len_utf8();
                trailing.push(Token::new(&rest[cut..]));
                rest = &rest[..cut];
            } else {
                break;
            }
        }
        if !rest.is_empty() {
            out.push(Token::new(rest));
        }
        out.extend(trailing.into_iter().rev());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn example_two_suspect() {
        assert_eq!(
            texts(&tokenize("Space is cool! :)")),
            ["Space", "is", "cool", "!", ":)"]
        );
    }

    #[test]
    fn empty_and_single() {
        assert!(tokenize("").is_empty());
        let t = tokenize("Hello");
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].lowered, "hello");
    }

    #[test]
    fn punctuation_edges_and_attached_emoticons() {
        assert_eq!(
            texts(&tokenize("(really?) don't... ok:(")),
            ["(", "really", "?", ")", "don't", ".", ".", ".", "ok", ":("]
        );
        assert_eq!(texts(&tokenize_with("yay ^_^", &["^_^"])), ["yay", "^_^"]);
        assert_eq!(texts(&tokenize("XD :D")), ["XD", ":D"]);
    }

    #[test]
    fn non_ascii_is_safe() {
        assert_eq!(texts(&tokenize("¡hola! café…")), ["¡", "hola", "!", "café", "…"]);
    }
}
