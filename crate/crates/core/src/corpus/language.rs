use std::collections::HashSet;
use std::sync::OnceLock;

use crate::textprep::tokenize;

const FUNCTION_WORDS: &str = include_str!("../../assets/english_function_words.txt");

/// Assigns a language code to a piece of text.
pub trait LanguageDetector {
    fn detect(&self, text: &str) -> String;
}

/// Calls text English when at least `min_fraction` of its tokens are
/// common English function words; anything else is `"und"`.
#[derive(Debug, Clone)]
pub struct FunctionWordDetector {
    pub min_fraction: f64,
}

impl Default for FunctionWordDetector {
    fn default() -> Self {
        FunctionWordDetector { min_fraction: 0.2 }
    }
}

pub fn english_function_words() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| {
        FUNCTION_WORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_owned)
            .collect()
    })
}

impl LanguageDetector for FunctionWordDetector {
    fn detect(&self, text: &str) -> String {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return "und".into();
        }
        let words = english_function_words();
        let hits = tokens.iter().filter(|t| words.contains(t.as_str())).count();
        if hits as f64 / tokens.len() as f64 >= self.min_fraction {
            "en".into()
        } else {
            "und".into()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn english_and_not() {
        let d = FunctionWordDetector::default();
        assert_eq!(d.detect("I am going to the shop with my friend"), "en");
        assert_eq!(d.detect("ich gehe heute mit meinem Freund einkaufen"), "und");
        assert_eq!(d.detect("http://x.co"), "und");
    }
}
