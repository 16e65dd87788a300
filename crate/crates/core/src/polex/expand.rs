use std::collections::HashSet;

use super::lexicon::{Lexicon, Provenance};
use super::skipgram::Embedding;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` vocabulary tokens closest to `token` in Euclidean distance,
/// skipping `exclude`. Ties go to the lexicographically smaller token.
pub fn nearest(emb: &Embedding, token: &str, k: usize, exclude: &dyn Fn(&str) -> bool) -> Vec<String> {
    let Some(q) = emb.get(token) else {
        return Vec::new();
    };
    let mut cands: Vec<(f64, &str)> = emb
        .vocab
        .iter()
        .enumerate()
        .filter(|(_, t)| t.as_str() != token && !exclude(t))
        .map(|(i, t)| (sq_dist(q, emb.vector(i)), t.as_str()))
        .collect();
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    cands.into_iter().take(k).map(|(_, t)| t.to_owned()).collect()
}

/// Adds the `k` nearest neighbours of every seed found in the embedding.
/// Neighbours that are already lexicon terms or on the denylist are
/// skipped rather than replaced.
pub fn expand_lexicon(emb: &Embedding, seeds: &Lexicon, k: usize, denylist: &HashSet<&str>) -> Lexicon {
    let mut out = seeds.clone();
    let exclude = |t: &str| seeds.contains(t) || denylist.contains(t);
    for seed in seeds.terms() {
        for w in nearest(emb, seed, k, &exclude) {
            out.insert(w, None, Provenance::Expanded);
        }
    }
    out
}
