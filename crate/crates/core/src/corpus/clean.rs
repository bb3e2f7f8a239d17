//! Tweet cleaning.
//!
//! Rules, applied in order:
//!
//! 1. URLs: maximal substrings matching `https?://\S+` (case-insensitive)
//!    or a bare `t.co/\S+` are replaced by a space.
//! 2. Mentions: whitespace-delimited tokens starting with `@` are dropped.
//! 3. Punctuation: every character in the punctuation class is deleted
//!    (not replaced), so `0+0-0` becomes `000`.
//! 4. Whitespace runs collapse to one space; the result is trimmed.
//!
//! The punctuation class is every Unicode general category `P*`
//! (`Pc Pd Ps Pe Pi Pf Po`) plus the ASCII symbols listed in
//! [`EXTRA_PUNCTUATION`]. Other symbol categories (currency, emoji,
//! modifier letters) are kept.
//!
//! Every rule removes characters that later rules need to match (`:`,
//! `/`, `.`, `@` are all `Po`), which makes cleaning idempotent.

use std::sync::LazyLock;

use regex::Regex;

/// Symbols outside the Unicode `P*` categories that are still removed.
pub const EXTRA_PUNCTUATION: [char; 7] = ['+', '=', '<', '>', '|', '~', '^'];

static URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(?:https?://\S+|\bt\.co/\S+)").expect("valid regex"));

static PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\p{P}$").expect("valid regex"));

pub fn is_punctuation(c: char) -> bool {
    if EXTRA_PUNCTUATION.contains(&c) {
        return true;
    }
    let mut buf = [0u8; 4];
    PUNCT.is_match(c.encode_utf8(&mut buf))
}

pub fn clean_text(raw: &str) -> String {
    let without_urls = URL.replace_all(raw, " ");
    let mut out = String::with_capacity(without_urls.len());
    for token in without_urls.split_whitespace() {
        if token.starts_with('@') {
            continue;
        }
        let stripped: String = token.chars().filter(|&c| !is_punctuation(c)).collect();
        // tokens made only of punctuation vanish
        if stripped.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&stripped);
    }
    out
}
