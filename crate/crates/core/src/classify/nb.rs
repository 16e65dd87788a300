//! Naive Bayes with Gaussian continuous columns and Bernoulli binary
//! columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::ColumnKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    pub kinds: Vec<ColumnKind>,
    /// Log prior of Left and Right.
    pub log_prior: [f64; 2],
    /// Per column and class: (mean, variance) for Gaussian columns,
    /// (P(x=1), unused) for Bernoulli columns.
    pub stats: Vec<[(f64, f64); 2]>,
}

/// `y[i]` is true for Right.
pub fn train_nb(rows: &[&[f64]], kinds: &[ColumnKind], y: &[bool], alpha: f64, var_floor: f64) -> Result<NbParams> {
    let n_r = y.iter().filter(|&&r| r).count();
    let n_l = y.len() - n_r;
    if n_r < 2 || n_l < 2 {
        return Err(Error::SingleClass(format!("naive Bayes needs two examples per class (left {n_l}, right {n_r})")));
    }
    let counts = [n_l as f64, n_r as f64];
    let total = y.len() as f64;
    let log_prior = [(counts[0] / total).ln(), (counts[1] / total).ln()];
    let stats = kinds
        .iter()
        .enumerate()
        .map(|(j, kind)| {
            let mut out = [(0.0, 0.0); 2];
            for c in 0..2 {
                let vals: Vec<f64> = rows
                    .iter()
                    .zip(y)
                    .filter(|(_, &r)| (c == 1) == r)
                    .map(|(row, _)| row[j])
                    .collect();
                out[c] = match kind {
                    ColumnKind::Continuous => {
                        let m = vals.iter().sum::<f64>() / counts[c];
                        let v = vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (counts[c] - 1.0);
                        (m, v.max(var_floor))
                    }
                    ColumnKind::Binary => {
                        let ones = vals.iter().filter(|&&x| x > 0.5).count() as f64;
                        ((ones + alpha) / (counts[c] + 2.0 * alpha), 0.0)
                    }
                };
            }
            out
        })
        .collect();
    Ok(NbParams {
        kinds: kinds.to_vec(),
        log_prior,
        stats,
    })
}

impl NbParams {
    /// Class log joint densities (Left, Right).
    pub fn log_joint(&self, x: &[f64]) -> [f64; 2] {
        let mut lj = self.log_prior;
        for (j, kind) in self.kinds.iter().enumerate() {
            for c in 0..2 {
                let (a, b) = self.stats[j][c];
                lj[c] += match kind {
                    ColumnKind::Continuous => {
                        -0.5 * ((2.0 * std::f64::consts::PI * b).ln() + (x[j] - a).powi(2) / b)
                    }
                    ColumnKind::Binary => {
                        if x[j] > 0.5 {
                            a.ln()
                        } else {
                            (1.0 - a).ln()
                        }
                    }
                };
            }
        }
        lj
    }

    pub fn p_right(&self, x: &[f64]) -> f64 {
        let [l, r] = self.log_joint(x);
        // log-sum-exp
        let m = l.max(r);
        let z = m + ((l - m).exp() + (r - m).exp()).ln();
        (r - z).exp()
    }
}
