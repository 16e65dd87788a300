//! Pseudo-words that survive the text pipeline unchanged.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::english_function_words;
use crate::polex::{published_lexicon, default_denylist, default_manual_additions};
use crate::textprep::{porter_stem, smart_stopwords, tokenize};

const ONSETS: &[&str] = &[
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "v", "z", "br", "dr", "gr", "kl", "pl", "tr", "st",
];
const VOWELS: &[&str] = &["a", "o", "u", "i"];
const CODAS: &[&str] = &["", "k", "m", "n", "r", "t", "x", "p"];

/// `n` distinct lowercase words, each its own Porter stem and absent from
/// the stop-word, function-word and political lists.
pub fn pseudo_words(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let published = published_lexicon();
    let deny = default_denylist();
    let manual = default_manual_additions();
    let stop = smart_stopwords();
    let func = english_function_words();
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.random_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS[rng.random_range(0..ONSETS.len())]);
            w.push_str(VOWELS[rng.random_range(0..VOWELS.len())]);
        }
        w.push_str(CODAS[rng.random_range(0..CODAS.len())]);
        let ok = porter_stem(&w) == w
            && tokenize(&w) == [w.clone()]
            && !stop.contains(&w)
            && !func.contains(&w)
            && !published.contains(&w)
            && !deny.contains(&w)
            && !manual.contains(&w);
        if ok && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn words_are_stable_under_the_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let words = pseudo_words(&mut rng, 3000);
        let set: BTreeSet<_> = words.iter().collect();
        assert_eq!(set.len(), 3000);
        let p = crate::textprep::TextPipeline::default();
        for w in &words {
            assert_eq!(p.stems(w), vec![w.clone()]);
        }
    }
}
