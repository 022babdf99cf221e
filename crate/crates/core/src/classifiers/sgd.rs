//! Linear classifier trained by plain SGD on the logistic loss with an L2
//! penalty and the "optimal" step schedule η_t = 1/(α(t₀ + t)).
//! Multiclass problems use one-vs-rest.

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::tree::argmax;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdParams {
    pub alpha: f64,
    pub epochs: usize,
}

impl Default for SgdParams {
    fn default() -> Self {
        SgdParams { alpha: 1e-4, epochs: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Binary {
    weights: Vec<f64>,
    intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdModel {
    n_classes: usize,
    /// One model when binary (positive = class 1), else one per class.
    models: Vec<Binary>,
}

/// Offset `t₀` of the optimal schedule: the step at `t = 0` equals the
/// step that a typical weight magnitude `1/√√α` would call for.
pub fn optimal_t0(alpha: f64) -> f64 {
    let typw = (1.0 / alpha.sqrt()).sqrt();
    // |d loss / d p| at p = -typw, y = +1; never larger than 1 for the logistic loss
    let dloss = 1.0 / ((-typw).exp() + 1.0);
    let eta0 = typw / dloss.max(1.0);
    1.0 / (eta0 * alpha)
}

fn fit_binary(x: ArrayView2<f64>, targets: &[f64], params: &SgdParams, order: &[Vec<usize>]) -> Binary {
    let p = x.ncols();
    let alpha = params.alpha;
    let t0 = optimal_t0(alpha);
    let mut w = vec![0.0; p];
    let mut scale = 1.0; // w_true = scale * w
    let mut b = 0.0;
    let mut t = 1.0;
    for epoch_order in order {
        for &i in epoch_order {
            let row = x.row(i);
            let eta = 1.0 / (alpha * (t0 + t - 1.0));
            let score = scale * row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + b;
            let y = targets[i];
            let z = y * score;
            // -d/dp log(1 + e^{-y p})
            let dloss = if z > 18.0 {
                -y * (-z).exp()
            } else if z < -18.0 {
                -y
            } else {
                -y / (z.exp() + 1.0)
            };
            scale *= (1.0 - eta * alpha).max(1e-9);
            let step = -eta * dloss / scale;
            for (wj, xj) in w.iter_mut().zip(row.iter()) {
                *wj += step * xj;
            }
            b -= eta * dloss;
            if scale < 1e-9 {
                w.iter_mut().for_each(|v| *v *= scale);
                scale = 1.0;
            }
            t += 1.0;
        }
    }
    w.iter_mut().for_each(|v| *v *= scale);
    Binary {
        weights: w,
        intercept: b,
    }
}

impl SgdModel {
    pub fn fit(x: ArrayView2<f64>, y: &[usize], n_classes: usize, params: &SgdParams, seed: u64) -> Self {
        let n = y.len();
        let mut rng = seed::rng(seed);
        let order: Vec<Vec<usize>> = (0..params.epochs)
            .map(|_| {
                let mut o: Vec<usize> = (0..n).collect();
                o.shuffle(&mut rng);
                o
            })
            .collect();
        let positives: Vec<usize> = if n_classes == 2 { vec![1] } else { (0..n_classes).collect() };
        let models = positives
            .into_iter()
            .map(|c| {
                let targets: Vec<f64> = y.iter().map(|&v| if v == c { 1.0 } else { -1.0 }).collect();
                fit_binary(x, &targets, params, &order)
            })
            .collect();
        SgdModel { n_classes, models }
    }

    pub fn decision_function(&self, row: &[f64]) -> Vec<f64> {
        self.models
            .iter()
            .map(|m| m.intercept + m.weights.iter().zip(row).map(|(a, b)| a * b).sum::<f64>())
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
