//! Small text helpers shared by the ordering and evaluation code.

use std::sync::LazyLock;

use regex::Regex;

static PUNCT_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\p{P}+$").unwrap());
static PUNCT_CHAR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\p{P}").unwrap());

/// True if `token` is non-empty and consists only of Unicode punctuation.
pub fn is_punct_token(token: &str) -> bool {
    PUNCT_TOKEN.is_match(token)
}

/// Removes every Unicode punctuation character from `s`.
pub fn strip_punct(s: &str) -> String {
    PUNCT_CHAR.replace_all(s, "").into_owned()
}

/// Lowercases and splits on whitespace.
pub fn lower_tokens(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

/// Uppercases the first character of `s`.
pub fn capitalize_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}
