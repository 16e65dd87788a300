//! One-hidden-layer tanh network with a two-way softmax output.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NnConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for NnConfig {
    fn default() -> Self {
        NnConfig {
            hidden: 64,
            epochs: 200,
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 32,
            weight_decay: 0.0,
            seed: 1,
        }
    }
}

/// Parameters laid out as W1 (H×D), b1 (H), W2 (2×H), b2 (2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub input: usize,
    pub hidden: usize,
    pub weights: Vec<f64>,
}

impl MlpParams {
    pub fn n_params(input: usize, hidden: usize) -> usize {
        hidden * input + hidden + 2 * hidden + 2
    }

    pub fn init(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let mut weights = vec![0.0; Self::n_params(input, hidden)];
        let r1 = (6.0 / (input + hidden) as f64).sqrt();
        let r2 = (6.0 / (hidden + 2) as f64).sqrt();
        for w in &mut weights[..hidden * input] {
            *w = rng.random_range(-r1..r1);
        }
        let o = hidden * input + hidden;
        for w in &mut weights[o..o + 2 * hidden] {
            *w = rng.random_range(-r2..r2);
        }
        MlpParams { input, hidden, weights }
    }

    /// Softmax class probabilities (Left, Right) for a transformed input.
    pub fn forward(&self, x: &[f64]) -> [f64; 2] {
        let h = hidden_layer(&self.weights, self.input, self.hidden, x);
        softmax(output_layer(&self.weights, self.input, self.hidden, &h))
    }
}

fn hidden_layer(w: &[f64], d: usize, hn: usize, x: &[f64]) -> Vec<f64> {
    let b1 = &w[hn * d..hn * d + hn];
    (0..hn)
        .map(|j| {
            let row = &w[j * d..(j + 1) * d];
            (row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + b1[j]).tanh()
        })
        .collect()
}

fn output_layer(w: &[f64], d: usize, hn: usize, h: &[f64]) -> [f64; 2] {
    let o = hn * d + hn;
    let w2 = &w[o..o + 2 * hn];
    let b2 = &w[o + 2 * hn..o + 2 * hn + 2];
    let mut z = [b2[0], b2[1]];
    for c in 0..2 {
        z[c] += w2[c * hn..(c + 1) * hn].iter().zip(h).map(|(a, b)| a * b).sum::<f64>();
    }
    z
}

fn softmax(z: [f64; 2]) -> [f64; 2] {
    let m = z[0].max(z[1]);
    let e = [(z[0] - m).exp(), (z[1] - m).exp()];
    let s = e[0] + e[1];
    [e[0] / s, e[1] / s]
}

/// Mean cross-entropy over the batch plus ½λ‖W‖² on the weight matrices,
/// and its gradient in the parameter layout.
pub fn loss_and_gradient(p: &MlpParams, xs: &[&[f64]], ys: &[bool], weight_decay: f64) -> (f64, Vec<f64>) {
    let (d, hn) = (p.input, p.hidden);
    let w = &p.weights;
    let mut grad = vec![0.0; w.len()];
    let mut loss = 0.0;
    let n = xs.len() as f64;
    let o = hn * d + hn;
    for (x, &y) in xs.iter().zip(ys) {
        let h = hidden_layer(w, d, hn, x);
        let probs = softmax(output_layer(w, d, hn, &h));
        let target = usize::from(y);
        loss -= probs[target].max(f64::MIN_POSITIVE).ln() / n;
        let dz = [
            (probs[0] - f64::from(target == 0)) / n,
            (probs[1] - f64::from(target == 1)) / n,
        ];
        let mut dh = vec![0.0; hn];
        for c in 0..2 {
            for j in 0..hn {
                grad[o + c * hn + j] += dz[c] * h[j];
                dh[j] += dz[c] * w[o + c * hn + j];
            }
            grad[o + 2 * hn + c] += dz[c];
        }
        for j in 0..hn {
            let da = dh[j] * (1.0 - h[j] * h[j]);
            for (k, &xk) in x.iter().enumerate() {
                grad[j * d + k] += da * xk;
            }
            grad[hn * d + j] += da;
        }
    }
    if weight_decay > 0.0 {
        let mut reg = 0.0;
        for idx in (0..hn * d).chain(o..o + 2 * hn) {
            reg += w[idx] * w[idx];
            grad[idx] += weight_decay * w[idx];
        }
        loss += 0.5 * weight_decay * reg;
    }
    (loss, grad)
}

/// Mini-batch gradient descent with momentum. Returns the parameters and
/// the full-data loss after each epoch.
pub fn train_mlp(xs: &[Vec<f64>], ys: &[bool], cfg: &NnConfig) -> Result<(MlpParams, Vec<f64>)> {
    let d = xs.first().map_or(0, Vec::len);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut p = MlpParams::init(d, cfg.hidden, &mut rng);
    let mut velocity = vec![0.0; p.weights.len()];
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let all: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let batch = cfg.batch_size.max(1);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let bx: Vec<&[f64]> = chunk.iter().map(|&i| all[i]).collect();
            let by: Vec<bool> = chunk.iter().map(|&i| ys[i]).collect();
            let (_, g) = loss_and_gradient(&p, &bx, &by, cfg.weight_decay);
            for ((w, v), gi) in p.weights.iter_mut().zip(&mut velocity).zip(&g) {
                *v = cfg.momentum * *v - cfg.learning_rate * gi;
                *w += *v;
            }
        }
        let (loss, _) = loss_and_gradient(&p, &all, ys, cfg.weight_decay);
        if !loss.is_finite() || p.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Diverged);
        }
        history.push(loss);
    }
    Ok((p, history))
}
