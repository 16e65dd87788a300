use serde::{Deserialize, Serialize};

const EPS: f64 = 1e-10;

/// K × V ranking statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct WordScores {
    pub frex: Vec<Vec<f64>>,
    pub lift: Vec<Vec<f64>>,
    pub score: Vec<Vec<f64>>,
}

/// Ranks 1..=n with ties sharing their average rank.
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn word_scores(beta: &[Vec<f64>], frex_weight: f64) -> WordScores {
    let k = beta.len();
    let v = beta.first().map_or(0, Vec::len);
    let col_sum: Vec<f64> = (0..v).map(|w| beta.iter().map(|b| b[w] + EPS).sum()).collect();
    let col_log_sum: Vec<f64> = (0..v).map(|w| beta.iter().map(|b| (b[w] + EPS).ln()).sum()).collect();
    let mut frex = Vec::with_capacity(k);
    let mut lift = Vec::with_capacity(k);
    let mut score = Vec::with_capacity(k);
    for row in beta {
        let excl: Vec<f64> = (0..v).map(|w| (row[w] + EPS) / col_sum[w]).collect();
        let excl_rank = average_ranks(&excl);
        let freq_rank = average_ranks(row);
        frex.push(
            (0..v)
                .map(|w| {
                    let e = excl_rank[w] / v as f64;
                    let f = freq_rank[w] / v as f64;
                    1.0 / (frex_weight / e + (1.0 - frex_weight) / f)
                })
                .collect(),
        );
        if k == 1 {
            lift.push(vec![1.0; v]);
            score.push(vec![0.0; v]);
            continue;
        }
        let others = (k - 1) as f64;
        lift.push(
            (0..v)
                .map(|w| {
                    let own = row[w] + EPS;
                    own / ((col_sum[w] - own) / others)
                })
                .collect(),
        );
        score.push(
            (0..v)
                .map(|w| {
                    let own = (row[w] + EPS).ln();
                    own - (col_log_sum[w] - own) / others
                })
                .collect(),
        );
    }
    WordScores { frex, lift, score }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Frex,
    Lift,
    Score,
}

/// Indices of the `n` largest values; ties go to the lower index.
pub fn top_indices(values: &[f64], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(n);
    idx
}

/// Top `n_each` words by FREX, then LIFT, then Score, deduplicated in that
/// order and cut to `n_out`. Each word carries the statistic that first
/// listed it.
pub fn top_words(
    topic: usize,
    scores: &WordScores,
    vocab: &[String],
    n_each: usize,
    n_out: usize,
) -> Vec<(String, ScoreKind)> {
    let mut out: Vec<(usize, ScoreKind)> = Vec::new();
    let lists = [
        (ScoreKind::Frex, &scores.frex[topic]),
        (ScoreKind::Lift, &scores.lift[topic]),
        (ScoreKind::Score, &scores.score[topic]),
    ];
    for (kind, vals) in lists {
        for i in top_indices(vals, n_each) {
            if !out.iter().any(|&(j, _)| j == i) {
                out.push((i, kind));
            }
        }
    }
    if out.len() < n_out {
        log::warn!("topic {topic}: only {} distinct top words", out.len());
    }
    out.truncate(n_out);
    out.into_iter().map(|(i, k)| (vocab[i].clone(), k)).collect()
}
