use std::sync::LazyLock;

use regex::Regex;

static EDGE_PUNCT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[\p{P}[:punct:]]+|[\p{P}[:punct:]]+$").unwrap());

/// Lowercases, splits on Unicode whitespace and strips leading/trailing
/// punctuation from each piece. Pieces that end up empty are dropped.
/// Devanagari passes through untouched.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|piece| {
            let lowered = piece.to_lowercase();
            let stripped = EDGE_PUNCT.replace_all(&lowered, "");
            if stripped.is_empty() {
                None
            } else {
                Some(stripped.into_owned())
            }
        })
        .collect()
}

/// Lowercased, whitespace-collapsed form used as a lookup key.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}
