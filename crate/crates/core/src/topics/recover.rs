use super::cooc::Square;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoverParams {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RecoverParams {
    fn default() -> Self {
        RecoverParams {
            tol: 1e-7,
            max_iter: 500,
        }
    }
}

/// Per-word outcome of the simplex least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct WordFit {
    pub coefficients: Vec<f64>,
    pub residual: f64,
    pub uniform_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// β (K × V) plus the per-word fits it came from.
#[derive(Debug, Clone)]
pub struct Recovery {
    pub beta: Vec<Vec<f64>>,
    pub fits: Vec<WordFit>,
}

/// Minimises ‖q − Σ_k c_k a_k‖² over the simplex by exponentiated gradient
/// with step halving. `gram` is AAᵀ, `aq` is Aq and `qq` is qᵀq.
pub fn simplex_least_squares(gram: &[f64], aq: &[f64], qq: f64, params: &RecoverParams) -> WordFit {
    let k = aq.len();
    let obj = |c: &[f64]| -> f64 {
        let mut s = qq;
        for i in 0..k {
            let gi: f64 = (0..k).map(|j| gram[i * k + j] * c[j]).sum();
            s += c[i] * gi - 2.0 * c[i] * aq[i];
        }
        s.max(0.0)
    };
    let grad = |c: &[f64]| -> Vec<f64> {
        (0..k)
            .map(|i| 2.0 * ((0..k).map(|j| gram[i * k + j] * c[j]).sum::<f64>() - aq[i]))
            .collect()
    };
    let mut c = vec![1.0 / k as f64; k];
    let uniform = obj(&c);
    let mut f = uniform;
    let mut eta = 1.0;
    let mut converged = k == 1;
    let mut iterations = 0;
    let mut trial = vec![0.0; k];
    while !converged && iterations < params.max_iter {
        iterations += 1;
        let g = grad(&c);
        let gmin = g.iter().copied().fold(f64::INFINITY, f64::min);
        let gap: f64 = c.iter().zip(&g).map(|(ci, gi)| ci * gi).sum::<f64>() - gmin;
        if gap < params.tol {
            converged = true;
            break;
        }
        // backtracking: shrink until the objective does not increase
        let mut accepted = false;
        for _ in 0..60 {
            let mut z = 0.0;
            for i in 0..k {
                trial[i] = c[i] * (-eta * (g[i] - gmin)).exp();
                z += trial[i];
            }
            trial.iter_mut().for_each(|t| *t /= z);
            let ft = obj(&trial);
            if ft <= f {
                c.copy_from_slice(&trial);
                f = ft;
                accepted = true;
                eta *= 2.0;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            converged = true;
        }
    }
    WordFit {
        coefficients: c,
        residual: f.sqrt(),
        uniform_residual: uniform.sqrt(),
        iterations,
        converged,
    }
}

/// RecoverL2 followed by the Bayes flip: β_{k,v} ∝ C_{v,k} p(v), where
/// p(v) are the row sums of the unnormalised Q.
pub fn recover_beta(q: &Square, qrow: &Square, anchors: &[usize], params: &RecoverParams) -> Recovery {
    let v = qrow.n;
    let k = anchors.len();
    let mut gram = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            gram[a * k + b] = dot(qrow.row(anchors[a]), qrow.row(anchors[b]));
        }
    }
    let p = q.row_sums();
    let mut fits = Vec::with_capacity(v);
    let mut beta = vec![vec![0.0; v]; k];
    let mut nonconverged = 0usize;
    let mut worst = 0.0f64;
    for w in 0..v {
        let qw = qrow.row(w);
        let aq: Vec<f64> = anchors.iter().map(|&a| dot(qrow.row(a), qw)).collect();
        let fit = if let Some(pos) = anchors.iter().position(|&a| a == w) {
            let mut c = vec![0.0; k];
            c[pos] = 1.0;
            WordFit {
                coefficients: c,
                residual: 0.0,
                uniform_residual: 0.0,
                iterations: 0,
                converged: true,
            }
        } else {
            simplex_least_squares(&gram, &aq, dot(qw, qw), params)
        };
        if !fit.converged {
            nonconverged += 1;
            worst = worst.max(fit.residual);
        }
        for t in 0..k {
            beta[t][w] = fit.coefficients[t] * p[w];
        }
        fits.push(fit);
    }
    if nonconverged > 0 {
        log::warn!(
            "{nonconverged} of {v} words hit the iteration cap; largest residual norm {worst:.3e}"
        );
    }
    for row in &mut beta {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|x| *x /= s);
        } else {
            let u = 1.0 / v as f64;
            row.iter_mut().for_each(|x| *x = u);
        }
    }
    Recovery { beta, fits }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
