//! Skip-gram with negative sampling.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkipGramConfig {
    pub window: usize,
    pub min_freq: usize,
    pub dim: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Frequent-token subsampling threshold; 0 turns it off.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            window: 5,
            min_freq: 100,
            dim: 100,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            subsample: 1e-3,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub vocab: Vec<String>,
    pub counts: Vec<usize>,
    pub dim: usize,
    /// Row-major `vocab.len() × dim`.
    pub vectors: Vec<f64>,
}

impl Embedding {
    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.vocab.iter().position(|t| t == token)
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index_of(token).map(|i| self.vector(i))
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.get(a)?, self.get(b)?);
        let nx = dot(x, x).sqrt();
        let ny = dot(y, y).sqrt();
        Some(dot(x, y) / (nx * ny).max(f64::MIN_POSITIVE))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// `label − σ(u·v)`: the negative derivative of the pair loss with respect
/// to the dot product. Shared by training and the analytic gradient.
fn pair_coefficient(dot_uv: f64, label: f64) -> f64 {
    label - sigmoid(dot_uv)
}

/// Loss of one (center, context, negatives) sample:
/// −log σ(u_o·v) − Σ_k log σ(−u_k·v).
pub fn sgns_loss(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> f64 {
    let mut loss = -log_sigmoid(dot(context, center));
    for u in negatives {
        loss -= log_sigmoid(-dot(u, center));
    }
    loss
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradients {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn sgns_gradients(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> SgnsGradients {
    let mut g_center = vec![0.0; center.len()];
    let mut one = |u: &[f64], label: f64| -> Vec<f64> {
        let g = -pair_coefficient(dot(u, center), label);
        for (gc, &ui) in g_center.iter_mut().zip(u) {
            *gc += g * ui;
        }
        center.iter().map(|&v| g * v).collect()
    };
    let g_context = one(context, 1.0);
    let g_negs = negatives.iter().map(|u| one(u, 0.0)).collect();
    SgnsGradients {
        center: g_center,
        context: g_context,
        negatives: g_negs,
    }
}

/// Counts tokens and keeps those with frequency ≥ `min_freq`, ordered by
/// descending count then token.
pub fn build_vocab(corpus: &[Vec<String>], min_freq: usize) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in corpus {
        for t in s {
            *counts.entry(t).or_insert(0) += 1;
        }
    }
    let mut vocab: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_freq)
        .map(|(t, c)| (t.to_owned(), c))
        .collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    vocab
}

pub fn train_skipgram(corpus: &[Vec<String>], cfg: &SkipGramConfig) -> Result<Embedding> {
    if cfg.dim == 0 || cfg.window == 0 {
        return Err(Error::InvalidInput("skip-gram dim and window must be positive".into()));
    }
    let vocab = build_vocab(corpus, cfg.min_freq);
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_freq: cfg.min_freq,
        });
    }
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (t, _))| (t.as_str(), i)).collect();
    let sentences: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| s.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    let n = vocab.len();
    let dim = cfg.dim;
    let total: usize = vocab.iter().map(|(_, c)| c).sum();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut input: Vec<f64> = (0..n * dim)
        .map(|_| (rng.random::<f64>() - 0.5) / dim as f64)
        .collect();
    let mut output = vec![0.0; n * dim];

    let noise = WeightedAliasIndex::new(vocab.iter().map(|(_, c)| (*c as f64).powf(0.75)).collect())
        .map_err(|e| Error::InvalidInput(format!("noise distribution: {e}")))?;
    let keep_prob: Vec<f64> = vocab
        .iter()
        .map(|(_, c)| {
            if cfg.subsample <= 0.0 {
                return 1.0;
            }
            let f = *c as f64 / (cfg.subsample * total as f64);
            ((f.sqrt() + 1.0) / f).min(1.0)
        })
        .collect();

    let planned = (cfg.epochs * total) as f64 + 1.0;
    let mut seen = 0usize;
    let mut grad = vec![0.0; dim];
    let mut kept = Vec::new();
    for _ in 0..cfg.epochs {
        for sentence in &sentences {
            seen += sentence.len();
            kept.clear();
            kept.extend(sentence.iter().copied().filter(|&w| rng.random::<f64>() < keep_prob[w]));
            let lr = cfg.learning_rate * (1.0 - seen as f64 / planned).max(1e-4);
            for (i, &center) in kept.iter().enumerate() {
                let reach = cfg.window - rng.random_range(0..cfg.window);
                let lo = i.saturating_sub(reach);
                let hi = (i + reach).min(kept.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let context = kept[j];
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let v = &input[center * dim..(center + 1) * dim];
                    for k in 0..=cfg.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let u = &mut output[target * dim..(target + 1) * dim];
                        let g = lr * pair_coefficient(dot(u, v), label);
                        for d in 0..dim {
                            grad[d] += g * u[d];
                            u[d] += g * v[d];
                        }
                    }
                    for (x, g) in input[center * dim..(center + 1) * dim].iter_mut().zip(&grad) {
                        *x += g;
                    }
                }
            }
        }
    }

    Ok(Embedding {
        counts: vocab.iter().map(|(_, c)| *c).collect(),
        vocab: vocab.into_iter().map(|(t, _)| t).collect(),
        dim,
        vectors: input,
    })
}
