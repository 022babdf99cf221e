//! Multinomial logistic regression with an L2 penalty, fitted by L-BFGS
//! with Armijo backtracking (so the objective never increases).

use std::collections::VecDeque;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::tree::argmax;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// Inverse penalty strength.
    pub c: f64,
    pub max_iter: usize,
    /// Stop once the gradient's max-norm drops below this.
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            c: 1.0,
            max_iter: 100,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    n_classes: usize,
    width: usize,
    /// `K × p`, row-major.
    weights: Vec<f64>,
    intercept: Vec<f64>,
    /// Objective at the start and after every iteration.
    loss_history: Vec<f64>,
    converged: bool,
}

/// Penalised mean cross-entropy and its gradient. `theta` holds the `K × p`
/// weights followed by the `K` intercepts; the intercepts are not penalised.
pub fn objective(x: ArrayView2<f64>, y: &[usize], n_classes: usize, c: f64, theta: &[f64], grad: &mut [f64]) -> f64 {
    let (n, p) = x.dim();
    let k = n_classes;
    let (w, b) = theta.split_at(k * p);
    grad.fill(0.0);
    let mut loss = 0.0;
    let mut z = vec![0.0; k];
    for (i, row) in x.rows().into_iter().enumerate() {
        for (c_idx, zc) in z.iter_mut().enumerate() {
            let wr = &w[c_idx * p..(c_idx + 1) * p];
            *zc = b[c_idx] + row.iter().zip(wr).map(|(a, b)| a * b).sum::<f64>();
        }
        let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = zmax + z.iter().map(|v| (v - zmax).exp()).sum::<f64>().ln();
        loss += lse - z[y[i]];
        for (c_idx, &zc) in z.iter().enumerate() {
            let residual = (zc - lse).exp() - if c_idx == y[i] { 1.0 } else { 0.0 };
            let g = &mut grad[c_idx * p..(c_idx + 1) * p];
            for (gj, xj) in g.iter_mut().zip(row.iter()) {
                *gj += residual * xj;
            }
            grad[k * p + c_idx] += residual;
        }
    }
    let nf = n as f64;
    let penalty_scale = 1.0 / (c * nf);
    let sq: f64 = w.iter().map(|v| v * v).sum();
    for (j, g) in grad.iter_mut().enumerate() {
        *g /= nf;
        if j < k * p {
            *g += penalty_scale * w[j];
        }
    }
    loss / nf + 0.5 * penalty_scale * sq
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LogisticModel {
    pub fn fit(x: ArrayView2<f64>, y: &[usize], n_classes: usize, params: &LogisticParams) -> Self {
        let p = x.ncols();
        let dim = n_classes * p + n_classes;
        let mut theta = vec![0.0; dim];
        let mut grad = vec![0.0; dim];
        let mut f = objective(x, y, n_classes, params.c, &theta, &mut grad);
        let mut loss_history = vec![f];
        let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
        let mut converged = false;
        let mut trial = vec![0.0; dim];
        let mut trial_grad = vec![0.0; dim];

        for _ in 0..params.max_iter {
            let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            if gmax < params.tol {
                converged = true;
                break;
            }
            // two-loop recursion
            let mut d: Vec<f64> = grad.iter().map(|g| -g).collect();
            let mut alphas = Vec::with_capacity(memory.len());
            for (s, yv, rho) in memory.iter().rev() {
                let a = rho * dot(s, &d);
                d.iter_mut().zip(yv).for_each(|(di, yi)| *di -= a * yi);
                alphas.push(a);
            }
            if let Some((s, yv, _)) = memory.back() {
                let gamma = dot(s, yv) / dot(yv, yv);
                d.iter_mut().for_each(|di| *di *= gamma);
            }
            for ((s, yv, rho), a) in memory.iter().zip(alphas.iter().rev()) {
                let beta = rho * dot(yv, &d);
                d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - beta) * si);
            }
            let mut slope = dot(&grad, &d);
            if !(slope < 0.0) {
                memory.clear();
                d = grad.iter().map(|g| -g).collect();
                slope = dot(&grad, &d);
            }
            let mut step = if memory.is_empty() { (1.0 / gmax).min(1.0) } else { 1.0 };
            let mut accepted = false;
            for _ in 0..60 {
                trial.iter_mut().zip(theta.iter().zip(&d)).for_each(|(t, (th, di))| *t = th + step * di);
                let ft = objective(x, y, n_classes, params.c, &trial, &mut trial_grad);
                if ft <= f + 1e-4 * step * slope {
                    let s: Vec<f64> = trial.iter().zip(&theta).map(|(a, b)| a - b).collect();
                    let yv: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
                    let sy = dot(&s, &yv);
                    if sy > 1e-12 {
                        if memory.len() == 10 {
                            memory.pop_front();
                        }
                        memory.push_back((s, yv, 1.0 / sy));
                    }
                    std::mem::swap(&mut theta, &mut trial);
                    std::mem::swap(&mut grad, &mut trial_grad);
                    f = ft;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                // no further decrease representable in floating point
                converged = true;
                break;
            }
            loss_history.push(f);
        }
        let intercept = theta.split_off(n_classes * p);
        LogisticModel {
            n_classes,
            width: p,
            weights: theta,
            intercept,
            loss_history,
            converged,
        }
    }

    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    pub fn iterations(&self) -> usize {
        self.loss_history.len() - 1
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn decision_function(&self, row: &[f64]) -> Vec<f64> {
        (0..self.n_classes)
            .map(|c| self.intercept[c] + dot(&self.weights[c * self.width..(c + 1) * self.width], row))
            .collect()
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<usize> {
        x.rows()
            .into_iter()
            .map(|r| argmax(&self.decision_function(&r.to_vec())))
            .collect()
    }
}
