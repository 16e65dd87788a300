use std::collections::HashSet;
use std::sync::OnceLock;

const SMART_LIST: &str = include_str!("../../assets/smart_stopwords.txt");

/// The SMART stop list (571 entries, 570 distinct).
pub fn smart_stopwords() -> &'static HashSet<String> {
    static SMART: OnceLock<HashSet<String>> = OnceLock::new();
    SMART.get_or_init(|| {
        SMART_LIST
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_owned)
            .collect()
    })
}
