//! Tokenizers for the two text paths: feature extraction (alphabetic only)
//! and lexicon matching (hashtags, mentions and apostrophes kept).

use std::sync::OnceLock;

use regex::Regex;

fn url_pattern() -> &'static Regex {
    static URL: OnceLock<Regex> = OnceLock::new();
    URL.get_or_init(|| Regex::new(r"(?i)(?:https?://|\bwww\.)\S*").expect("valid url regex"))
}

/// Replaces every http/https/www URL with a space.
pub fn strip_urls(text: &str) -> String {
    url_pattern().replace_all(text, " ").into_owned()
}

/// Feature-path tokenizer: URLs removed, lowercased, every non-alphabetic
/// character acts as a separator.
pub fn tokenize(text: &str) -> Vec<String> {
    let cleaned = strip_urls(text).to_lowercase();
    cleaned
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Lexicon-matching tokenizer.
///
/// Keeps letters, digits, `_` and apostrophes inside a token; `#` and `@`
/// start a new token so `#ge2015` and `@uklabour` survive intact. Curly
/// apostrophes are folded to `'`. Leading apostrophes are dropped and a
/// trailing one is kept only after an `s` (`tories'`).
pub fn match_tokens(text: &str) -> Vec<String> {
    let cleaned = strip_urls(text).to_lowercase();
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in cleaned.chars() {
        let c = if c == '\u{2019}' || c == '\u{2018}' { '\'' } else { c };
        if c.is_alphanumeric() || c == '_' || c == '\'' {
            cur.push(c);
        } else if c == '#' || c == '@' {
            flush_match_token(&mut cur, &mut out);
            cur.push(c);
        } else {
            flush_match_token(&mut cur, &mut out);
        }
    }
    flush_match_token(&mut cur, &mut out);
    out
}

fn flush_match_token(cur: &mut String, out: &mut Vec<String>) {
    if cur.is_empty() {
        return;
    }
    let (prefix, body) = match cur.chars().next() {
        Some(p @ ('#' | '@')) => (Some(p), &cur[1..]),
        _ => (None, cur.as_str()),
    };
    let body = body.trim_start_matches('\'');
    let mut body = body.to_owned();
    while body.ends_with('\'') {
        let without = &body[..body.len() - 1];
        if without.ends_with('s') && !without.ends_with('\'') {
            break;
        }
        body.truncate(body.len() - 1);
    }
    if !body.is_empty() {
        let mut token = String::with_capacity(body.len() + 1);
        if let Some(p) = prefix {
            token.push(p);
        }
        token.push_str(&body);
        out.push(token);
    }
    cur.clear();
}
