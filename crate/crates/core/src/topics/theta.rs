#[derive(Debug, Clone, PartialEq)]
pub struct EmParams {
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for EmParams {
    fn default() -> Self {
        EmParams {
            max_iter: 200,
            rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaFit {
    pub theta: Vec<f64>,
    /// Log-likelihood after initialisation and after every EM step.
    pub trace: Vec<f64>,
    /// True when the document had no mass on words any topic can emit.
    pub out_of_vocabulary: bool,
}

fn log_likelihood(counts: &[(usize, f64)], theta: &[f64], beta: &[Vec<f64>]) -> f64 {
    counts
        .iter()
        .map(|&(v, h)| {
            let m: f64 = theta.iter().zip(beta).map(|(t, b)| t * b[v]).sum();
            h * m.ln()
        })
        .sum()
}

/// Topic proportions of one document by EM folding-in against fixed β.
/// `counts` are (word index, count) pairs in β's column space.
pub fn infer_theta(counts: &[(usize, f64)], beta: &[Vec<f64>], params: &EmParams) -> ThetaFit {
    let k = beta.len();
    let uniform = vec![1.0 / k as f64; k];
    let usable: Vec<(usize, f64)> = counts
        .iter()
        .copied()
        .filter(|&(v, h)| h > 0.0 && beta.iter().any(|b| b[v] > 0.0))
        .collect();
    let total: f64 = usable.iter().map(|p| p.1).sum();
    if total <= 0.0 {
        return ThetaFit {
            theta: uniform,
            trace: Vec::new(),
            out_of_vocabulary: true,
        };
    }
    let mut theta = uniform;
    let mut ll = log_likelihood(&usable, &theta, beta);
    let mut trace = vec![ll];
    let mut next = vec![0.0; k];
    for _ in 0..params.max_iter {
        next.iter_mut().for_each(|x| *x = 0.0);
        for &(v, h) in &usable {
            let m: f64 = theta.iter().zip(beta).map(|(t, b)| t * b[v]).sum();
            for j in 0..k {
                next[j] += h * theta[j] * beta[j][v] / m;
            }
        }
        let s: f64 = next.iter().sum();
        for j in 0..k {
            theta[j] = next[j] / s;
        }
        let new_ll = log_likelihood(&usable, &theta, beta);
        trace.push(new_ll);
        let rel = (new_ll - ll).abs() / ll.abs().max(f64::MIN_POSITIVE);
        ll = new_ll;
        if rel < params.rel_tol {
            break;
        }
    }
    ThetaFit {
        theta,
        trace,
        out_of_vocabulary: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exclusive_words_pin_topic() {
        let beta = vec![vec![0.5, 0.5, 0.0, 0.0], vec![0.0, 0.0, 0.5, 0.5]];
        let fit = infer_theta(&[(2, 3.0), (3, 1.0)], &beta, &EmParams::default());
        assert!((fit.theta[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn single_topic() {
        let beta = vec![vec![0.2, 0.8]];
        assert_eq!(infer_theta(&[(0, 1.0)], &beta, &EmParams::default()).theta, vec![1.0]);
    }

    #[test]
    fn oov_is_uniform() {
        let beta = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        let fit = infer_theta(&[(1, 4.0)], &beta, &EmParams::default());
        assert!(fit.out_of_vocabulary);
        assert_eq!(fit.theta, vec![0.5, 0.5]);
    }

    proptest! {
        #[test]
        fn likelihood_non_decreasing(raw in proptest::collection::vec(0.01..1.0f64, 12), counts in proptest::collection::vec(0u32..6, 4)) {
            let beta: Vec<Vec<f64>> = raw.chunks(4).map(|r| {
                let s: f64 = r.iter().sum();
                r.iter().map(|x| x / s).collect()
            }).collect();
            let h: Vec<(usize, f64)> = counts.iter().enumerate().filter(|p| *p.1 > 0).map(|(i, &c)| (i, c as f64)).collect();
            prop_assume!(!h.is_empty());
            let fit = infer_theta(&h, &beta, &EmParams::default());
            for w in fit.trace.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12 * w[0].abs().max(1.0));
            }
            prop_assert!((fit.theta.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
