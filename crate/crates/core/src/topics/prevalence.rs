use serde::{Deserialize, Serialize};

use crate::corpus::LeaningLabel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceEffect {
    pub topic: usize,
    /// Slope on the Right indicator, i.e. mean θ_k(Right) − mean θ_k(Left).
    pub estimate: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Zero residual variance: the interval has collapsed to a point.
    pub degenerate: bool,
}

const Z95: f64 = 1.959963984540054;

/// OLS of each θ column on a Right indicator.
pub fn prevalence_regression(theta: &[Vec<f64>], labels: &[LeaningLabel]) -> Result<Vec<PrevalenceEffect>> {
    if theta.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} theta rows but {} labels",
            theta.len(),
            labels.len()
        )));
    }
    if labels.iter().any(|&l| l == LeaningLabel::Dropped) {
        return Err(Error::InvalidInput("prevalence regression needs Left/Right labels only".into()));
    }
    let n_r = labels.iter().filter(|&&l| l == LeaningLabel::Right).count();
    let n_l = labels.len() - n_r;
    if n_r == 0 || n_l == 0 {
        return Err(Error::SingleClass("prevalence regression".into()));
    }
    let n = labels.len();
    if n < 3 {
        return Err(Error::InvalidInput("prevalence regression needs at least 3 documents".into()));
    }
    let k = theta[0].len();
    let mut out = Vec::with_capacity(k);
    for t in 0..k {
        let (mut s_r, mut s_l) = (0.0, 0.0);
        for (row, &l) in theta.iter().zip(labels) {
            if l == LeaningLabel::Right {
                s_r += row[t];
            } else {
                s_l += row[t];
            }
        }
        let (m_r, m_l) = (s_r / n_r as f64, s_l / n_l as f64);
        let rss: f64 = theta
            .iter()
            .zip(labels)
            .map(|(row, &l)| {
                let fitted = if l == LeaningLabel::Right { m_r } else { m_l };
                (row[t] - fitted).powi(2)
            })
            .sum();
        let sigma2 = rss / (n - 2) as f64;
        let se = (sigma2 * (1.0 / n_r as f64 + 1.0 / n_l as f64)).sqrt();
        let estimate = m_r - m_l;
        out.push(PrevalenceEffect {
            topic: t,
            estimate,
            std_error: se,
            ci_low: estimate - Z95 * se,
            ci_high: estimate + Z95 * se,
            degenerate: se == 0.0,
        });
    }
    Ok(out)
}
