use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;
use unicode_normalization::UnicodeNormalization;

static HASHTAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#+(\w)").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w+").unwrap());
static HTTP_URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)https?://\S*").unwrap());
static TCO_PATH: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bt\.co/\S*").unwrap());

fn normalize_once(raw: &str) -> String {
    let s = HASHTAG.replace_all(raw, "$1");
    let s = MENTION.replace_all(&s, "");
    let s = HTTP_URL.replace_all(&s, "");
    let s = TCO_PATH.replace_all(&s, "");
    let s: String = s.nfc().collect();
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Strips URLs, bare `t.co` paths and @-mentions, removes `#` from hashtags,
/// NFC-normalizes and collapses whitespace.
///
/// A removal can splice fragments into a new removable token (`http@x://y`),
/// so the rules are applied until nothing changes. Every pass either shrinks
/// the string or leaves it untouched, which bounds the loop.
pub fn normalize_text(raw: &str) -> String {
    let mut cur = normalize_once(raw);
    loop {
        let next = normalize_once(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// Distinct case-folded whitespace tokens.
pub fn unique_word_count(normalized: &str) -> usize {
    normalized
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<HashSet<_>>()
        .len()
}

fn is_devanagari(c: char) -> bool {
    matches!(c, '\u{0900}'..='\u{097F}' | '\u{A8E0}'..='\u{A8FF}')
}

/// Script heuristic for posts without a language field: at least half
/// Devanagari codepoints is Hindi, at least half ASCII letters is English.
/// Whitespace, ASCII digits and ASCII punctuation are not counted.
pub fn detect_language(text: &str) -> Option<&'static str> {
    let (mut total, mut deva, mut ascii) = (0usize, 0usize, 0usize);
    for c in text.chars() {
        if c.is_whitespace() || c.is_ascii_digit() || c.is_ascii_punctuation() {
            continue;
        }
        total += 1;
        if is_devanagari(c) {
            deva += 1;
        } else if c.is_ascii_alphabetic() {
            ascii += 1;
        }
    }
    if total == 0 {
        None
    } else if 2 * deva >= total {
        Some("hi")
    } else if 2 * ascii >= total {
        Some("en")
    } else {
        None
    }
}
