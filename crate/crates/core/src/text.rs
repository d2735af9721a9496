//! Token normalization shared by keyword matching and sentiment scoring.

pub(crate) fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation() || (!c.is_alphanumeric() && !c.is_whitespace())
}

/// Whitespace tokens, lowercased, with leading and trailing punctuation
/// stripped. A token made only of punctuation (an emoticon, say) is kept
/// whole.
pub(crate) fn normalized_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|raw| {
            let trimmed = raw.trim_matches(is_punct);
            if trimmed.is_empty() {
                raw.to_lowercase()
            } else {
                trimmed.to_lowercase()
            }
        })
        .collect()
}
