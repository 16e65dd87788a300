use leaning::textprep::{DfmBuilder, DfmKind};
use leaning::topics::{fit_topic_model, TopicConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

fn dirichlet(rng: &mut ChaCha8Rng, alpha: f64, n: usize) -> Vec<f64> {
    let g = Gamma::new(alpha, 1.0).unwrap();
    let x: Vec<f64> = (0..n).map(|_| g.sample(rng)).collect();
    let s: f64 = x.iter().sum();
    x.into_iter().map(|v| v / s).collect()
}

fn categorical(rng: &mut ChaCha8Rng, p: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// Separable β: word t is topic t's anchor; the rest is a sparse mixture.
fn planted_beta(rng: &mut ChaCha8Rng, k: usize, v: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|t| {
            let rest = dirichlet(rng, 1.0, v - k);
            let mut row = vec![0.0; v];
            row[t] = 0.05;
            for (j, r) in rest.into_iter().enumerate() {
                row[k + j] = 0.95 * r;
            }
            row
        })
        .collect()
}

#[test]
fn planted_topics_recovered() {
    let (k, v) = (6, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let beta = planted_beta(&mut rng, k, v);
    let mut b = DfmBuilder::new();
    for d in 0..2000 {
        let theta = dirichlet(&mut rng, 0.5, k);
        let words: Vec<String> = (0..120)
            .map(|_| {
                let t = categorical(&mut rng, &theta);
                format!("w{:03}", categorical(&mut rng, &beta[t]))
            })
            .collect();
        b.push_document(format!("d{d:04}"), words);
    }
    let dfm = b.finish(DfmKind::Text).unwrap();
    let cfg = TopicConfig { k, anchor_min_df: 10, ..Default::default() };
    let (model, _) = fit_topic_model(&dfm, &cfg).unwrap();

    let mut anchors: Vec<String> = model.anchors.iter().map(|&a| model.vocab[a].clone()).collect();
    anchors.sort();
    let want: Vec<String> = (0..k).map(|t| format!("w{t:03}")).collect();
    assert_eq!(anchors, want);

    for row in &model.beta {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }
    for (i, &a) in model.anchors.iter().enumerate() {
        let t: usize = model.vocab[a][1..].parse().unwrap();
        let truth: Vec<f64> = (0..v)
            .map(|w| {
                let col = model.vocab.iter().position(|c| c == &format!("w{w:03}"));
                col.map_or(0.0, |_| beta[t][w])
            })
            .collect();
        let l1: f64 = (0..v)
            .map(|w| {
                let est = model.vocab.iter().position(|c| c == &format!("w{w:03}")).map_or(0.0, |c| model.beta[i][c]);
                (est - truth[w]).abs()
            })
            .sum();
        assert!(l1 <= 0.15, "topic {t}: L1 {l1}");
    }
}
