//! RBF-kernel support vector classifier, one-vs-rest, trained by SMO with
//! maximal-violating-pair selection. The pair-update cap may stop the
//! optimiser early; the model stays usable and records whether it converged.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::tree::argmax;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// Kernel width; `None` means `1 / n_features`.
    pub gamma: Option<f64>,
    /// Maximum number of SMO pair updates per binary problem.
    pub max_iter: usize,
    /// KKT violation tolerance.
    pub tol: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: None,
            max_iter: 100,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Binary {
    /// Indices into the stored support set.
    support: Vec<usize>,
    /// `α_i y_i` for each support index.
    coef: Vec<f64>,
    rho: f64,
    converged: bool,
    iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    n_classes: usize,
    gamma: f64,
    width: usize,
    /// Training rows referenced by any binary model, row-major.
    support_rows: Vec<f64>,
    models: Vec<Binary>,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

fn kernel_row(rows: &[Vec<f64>], i: usize, gamma: f64) -> Vec<f64> {
    rows.iter().map(|r| rbf(&rows[i], r, gamma)).collect()
}

/// Solves `min ½αᵀQα − eᵀα` s.t. `0 ≤ α ≤ C`, `yᵀα = 0` with `Q_ij = y_i y_j K_ij`.
fn smo(rows: &[Vec<f64>], y: &[f64], params: &SvmParams, gamma: f64) -> (Vec<f64>, f64, bool, usize) {
    let n = y.len();
    let c = params.c;
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut cache: std::collections::HashMap<usize, Vec<f64>> = std::collections::HashMap::new();
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);
    let mut converged = false;
    let mut iterations = 0;
    loop {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < params.tol {
            converged = true;
            break;
        }
        if iterations >= params.max_iter {
            break;
        }
        iterations += 1;
        let ki = cache.entry(i).or_insert_with(|| kernel_row(rows, i, gamma)).clone();
        let kj = cache.entry(j).or_insert_with(|| kernel_row(rows, j, gamma)).clone();
        let eta = (ki[i] + kj[j] - 2.0 * ki[j]).max(1e-12);
        // move along the feasible direction y_i e_i − y_j e_j
        let step_uncapped = (gmax - gmin) / eta;
        let cap_i = if y[i] > 0.0 { c - alpha[i] } else { alpha[i] };
        let cap_j = if y[j] > 0.0 { alpha[j] } else { c - alpha[j] };
        let step = step_uncapped.min(cap_i).min(cap_j);
        let di = y[i] * step;
        let dj = -y[j] * step;
        alpha[i] = (alpha[i] + di).clamp(0.0, c);
        alpha[j] = (alpha[j] + dj).clamp(0.0, c);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }
    // offset from free vectors, else the midpoint of the feasible interval
    let mut sum = 0.0;
    let mut free = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            sum += yg;
            free += 1;
        } else if (alpha[t] >= c && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if free > 0 {
        sum / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    };
    (alpha, rho, converged, iterations)
}

impl SvmModel {
    pub fn fit(x: ArrayView2<f64>, y: &[usize], n_classes: usize, params: &SvmParams) -> Self {
        let (n, p) = x.dim();
        let gamma = params.gamma.unwrap_or(1.0 / p.max(1) as f64);
        let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
        let positives: Vec<usize> = if n_classes == 2 { vec![1] } else { (0..n_classes).collect() };
        let mut used = vec![usize::MAX; n];
        let mut support_rows = Vec::new();
        let mut n_support = 0;
        let mut models = Vec::with_capacity(positives.len());
        for c in positives {
            let targets: Vec<f64> = y.iter().map(|&v| if v == c { 1.0 } else { -1.0 }).collect();
            let (alpha, rho, converged, iterations) = smo(&rows, &targets, params, gamma);
            let mut support = Vec::new();
            let mut coef = Vec::new();
            for t in 0..n {
                if alpha[t] > 0.0 {
                    if used[t] == usize::MAX {
                        used[t] = n_support;
                        n_support += 1;
                        support_rows.extend_from_slice(&rows[t]);
                    }
                    support.push(used[t]);
                    coef.push(alpha[t] * targets[t]);
                }
            }
            models.push(Binary {
                support,
                coef,
                rho,
                converged,
                iterations,
            });
        }
        SvmModel {
            n_classes,
            gamma,
            width: p,
            support_rows,
            models,
        }
    }

    /// True when every binary sub-problem met the KKT tolerance within the cap.
    pub fn converged(&self) -> bool {
        self.models.iter().all(|m| m.converged)
    }

    pub fn iterations(&self) -> Vec<usize> {
        self.models.iter().map(|m| m.iterations).collect()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn decision_function(&self, row: &[f64]) -> Vec<f64> {
        let k: Vec<f64> = self
            .support_rows
            .chunks(self.width.max(1))
            .map(|s| rbf(s, row, self.gamma))
            .collect();
        self.models
            .iter()
            .map(|m| m.support.iter().zip(&m.coef).map(|(&s, c)| c * k[s]).sum::<f64>() - m.rho)
            .collect()
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<usize> {
        x.rows()
            .into_iter()
            .map(|r| {
                let s = self.decision_function(&r.to_vec());
                if self.n_classes == 2 {
                    usize::from(s[0] > 0.0)
                } else {
                    argmax(&s)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn separates_two_clusters() {
        let x = array![[0.0, 0.0], [0.1, 0.2], [0.2, 0.0], [3.0, 3.0], [3.1, 2.9], [2.8, 3.2]];
        let y = [0, 0, 0, 1, 1, 1];
        let m = SvmModel::fit(x.view(), &y, 2, &SvmParams::default());
        assert_eq!(m.predict(x.view()), y.to_vec());
        assert!(m.converged());
    }

    #[test]
    fn iteration_cap_is_respected() {
        let x = ndarray::Array2::from_shape_fn((60, 3), |(i, j)| ((i * 7 + j * 13) % 11) as f64 / 11.0);
        let y: Vec<usize> = (0..60).map(|i| (i * 5 % 3 == 0) as usize).collect();
        let params = SvmParams {
            max_iter: 5,
            ..Default::default()
        };
        let m = SvmModel::fit(x.view(), &y, 2, &params);
        assert!(m.iterations().iter().all(|&it| it <= 5));
        assert_eq!(m.predict(x.view()).len(), 60);
    }
}
