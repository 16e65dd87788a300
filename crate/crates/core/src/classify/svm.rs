//! C-SVC trained by SMO with second-order working-set selection.

use serde::{Deserialize, Serialize};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    /// (γ x·z + coef0)^degree
    Poly { gamma: f64, coef0: f64, degree: u32 },
    /// exp(−γ ‖x − z‖²)
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Poly { gamma, coef0, degree } => (gamma * dot(a, b) + coef0).powi(degree as i32),
            Kernel::Rbf { gamma } => {
                let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d).exp()
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoParams {
    pub c: f64,
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for SmoParams {
    fn default() -> Self {
        SmoParams {
            c: 1.0,
            eps: 1e-3,
            max_iter: 100_000,
        }
    }
}

/// Dual solution over the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves min ½αᵀQα − eᵀα s.t. yᵀα = 0, 0 ≤ α ≤ C, with
/// Q_ij = y_i y_j K_ij. `gram` is the n × n kernel matrix, row-major;
/// `y` holds ±1.
pub fn smo_solve(gram: &[f64], y: &[f64], params: &SmoParams) -> SmoSolution {
    let n = y.len();
    let c = params.c;
    let k = |i: usize, j: usize| gram[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut g = vec![-1.0; n];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        // i: maximal violating index in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if y[t] > 0.0 {
                if !upper(alpha[t]) && -g[t] >= gmax {
                    gmax = -g[t];
                    i_sel = Some(t);
                }
            } else if !lower(alpha[t]) && g[t] >= gmax {
                gmax = g[t];
                i_sel = Some(t);
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut obj_min = f64::INFINITY;
        if let Some(i) = i_sel {
            let kii = k(i, i);
            for t in 0..n {
                let qit = y[i] * y[t] * k(i, t);
                if y[t] > 0.0 {
                    if !lower(alpha[t]) {
                        let grad_diff = gmax + g[t];
                        gmax2 = gmax2.max(g[t]);
                        if grad_diff > 0.0 {
                            let quad = kii + k(t, t) - 2.0 * y[i] * qit;
                            let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                            if obj <= obj_min {
                                obj_min = obj;
                                j_sel = Some(t);
                            }
                        }
                    }
                } else if !upper(alpha[t]) {
                    let grad_diff = gmax - g[t];
                    gmax2 = gmax2.max(-g[t]);
                    if grad_diff > 0.0 {
                        let quad = kii + k(t, t) + 2.0 * y[i] * qit;
                        let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                        if obj <= obj_min {
                            obj_min = obj;
                            j_sel = Some(t);
                        }
                    }
                }
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        if gmax + gmax2 < params.eps {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * k(i, j);
        if y[i] != y[j] {
            let mut quad = k(i, i) + k(j, j) + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-g[i] - g[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = k(i, i) + k(j, j) - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (g[i] - g[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            g[t] += y[t] * (y[i] * k(i, t) * di + y[j] * k(j, t) * dj);
        }
    }
    if !converged {
        log::warn!("SMO stopped at the iteration cap ({}) before reaching tolerance", params.max_iter);
    }

    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let (mut n_free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * g[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };
    SmoSolution {
        alpha,
        rho,
        iterations,
        converged,
    }
}

/// Largest KKT violation of a solution, measured on y_i f(x_i) − 1.
pub fn kkt_violation(gram: &[f64], y: &[f64], sol: &SmoSolution, c: f64) -> f64 {
    let n = y.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        let f: f64 = (0..n).map(|j| sol.alpha[j] * y[j] * gram[i * n + j]).sum::<f64>() - sol.rho;
        let m = y[i] * f - 1.0;
        let v = if sol.alpha[i] <= 0.0 {
            (-m).max(0.0)
        } else if sol.alpha[i] >= c {
            m.max(0.0)
        } else {
            m.abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Support vectors with coefficients α_i y_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub kernel: Kernel,
    pub support_vectors: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    pub rho: f64,
}

impl SvmParams {
    pub fn from_solution(kernel: Kernel, xs: &[Vec<f64>], y: &[f64], sol: &SmoSolution) -> Self {
        let mut support_vectors = Vec::new();
        let mut coefficients = Vec::new();
        for (i, &a) in sol.alpha.iter().enumerate() {
            if a > 0.0 {
                support_vectors.push(xs[i].clone());
                coefficients.push(a * y[i]);
            }
        }
        SvmParams {
            kernel,
            support_vectors,
            coefficients,
            rho: sol.rho,
        }
    }

    /// Signed decision value; positive means Right.
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            - self.rho
    }
}

pub fn gram_matrix(kernel: &Kernel, xs: &[Vec<f64>]) -> Vec<f64> {
    let n = xs.len();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(&xs[i], &xs[j]);
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    g
}

/// Trains on already-transformed rows with ±1 targets.
pub fn fit_svm(kernel: Kernel, xs: &[Vec<f64>], y: &[f64], params: &SmoParams) -> (SvmParams, SmoSolution) {
    let gram = gram_matrix(&kernel, xs);
    let sol = smo_solve(&gram, y, params);
    (SvmParams::from_solution(kernel, xs, y, &sol), sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_rbf_separates() {
        let xs = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = [1.0, 1.0, -1.0, -1.0];
        let params = SmoParams { c: 10.0, ..Default::default() };
        let (m, sol) = fit_svm(Kernel::Rbf { gamma: 1.0 }, &xs, &y, &params);
        assert!(sol.converged);
        for (x, &t) in xs.iter().zip(&y) {
            assert!(m.decision(x) * t > 0.0);
        }
    }

    #[test]
    fn separable_linear_margin() {
        // closest opposite points (1,1) and (2,2): geometric margin √2/2
        let xs = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![2.0, 2.0], vec![3.0, 2.0], vec![2.0, 3.0]];
        let y = [-1.0, -1.0, -1.0, 1.0, 1.0, 1.0];
        let params = SmoParams { c: 1000.0, eps: 1e-6, ..Default::default() };
        let (m, _) = fit_svm(Kernel::Linear, &xs, &y, &params);
        let mut w = [0.0, 0.0];
        for (sv, c) in m.support_vectors.iter().zip(&m.coefficients) {
            w[0] += c * sv[0];
            w[1] += c * sv[1];
        }
        let norm = (w[0] * w[0] + w[1] * w[1]).sqrt();
        for (x, &t) in xs.iter().zip(&y) {
            assert!(m.decision(x) * t > 0.0);
        }
        let margin = xs.iter().zip(&y).map(|(x, &t)| t * m.decision(x) / norm).fold(f64::INFINITY, f64::min);
        assert!(margin >= 2f64.sqrt() / 2.0 - 1e-3, "margin {margin}");
    }

    #[test]
    fn duplicated_points_same_decision() {
        let xs = vec![vec![0.0, 0.0], vec![1.0, 0.2], vec![3.0, 3.0], vec![4.0, 2.5]];
        let y = [-1.0, -1.0, 1.0, 1.0];
        let params = SmoParams { c: 100.0, eps: 1e-8, ..Default::default() };
        let (a, _) = fit_svm(Kernel::Linear, &xs, &y, &params);
        let xs2: Vec<Vec<f64>> = xs.iter().chain(&xs).cloned().collect();
        let y2: Vec<f64> = y.iter().chain(&y).copied().collect();
        let (b, _) = fit_svm(Kernel::Linear, &xs2, &y2, &params);
        for probe in [[0.5, 0.5], [2.0, 1.0], [-1.0, 4.0]] {
            assert!((a.decision(&probe) - b.decision(&probe)).abs() < 1e-5);
        }
    }
}
