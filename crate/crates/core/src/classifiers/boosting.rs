//! Gradient-boosted regression trees on the log-loss. Binary problems fit
//! one tree per stage; K > 2 classes fit K trees per stage on softmax
//! residuals. Leaves take a single Newton step.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::tree::{argmax, grow_regressor, Columns, Tree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostingParams {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for BoostingParams {
    fn default() -> Self {
        BoostingParams {
            n_stages: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostingModel {
    n_classes: usize,
    learning_rate: f64,
    /// Initial raw score per output (one output when binary).
    init: Vec<f64>,
    /// `stages[s][k]` is the tree for output `k` at stage `s`.
    stages: Vec<Vec<Tree>>,
    /// Mean training log-loss after each stage.
    train_loss: Vec<f64>,
}

const DENOM_FLOOR: f64 = 1e-150;

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn log_loss(raw: &[Vec<f64>], y: &[usize], binary: bool) -> f64 {
    let n = y.len() as f64;
    raw.iter()
        .zip(y)
        .map(|(r, &yi)| {
            if binary {
                let z = r[0];
                // log(1 + e^{-z}) for y=1, log(1 + e^{z}) for y=0
                let s = if yi == 1 { -z } else { z };
                s.max(0.0) + (-s.abs()).exp().ln_1p()
            } else {
                let m = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = m + r.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
                lse - r[yi]
            }
        })
        .sum::<f64>()
        / n
}

impl BoostingModel {
    pub fn fit(x: ArrayView2<f64>, y: &[usize], n_classes: usize, params: &BoostingParams) -> Self {
        let n = y.len();
        let binary = n_classes == 2;
        let outputs = if binary { 1 } else { n_classes };
        let cols = Columns::new(x);
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_split: params.min_samples_split,
            min_samples_leaf: params.min_samples_leaf,
            max_features: None,
        };
        let mut prior = vec![0.0; n_classes];
        for &c in y {
            prior[c] += 1.0 / n as f64;
        }
        let init: Vec<f64> = if binary {
            vec![(prior[1] / prior[0]).ln()]
        } else {
            prior.iter().map(|p| p.ln()).collect()
        };
        let mut raw: Vec<Vec<f64>> = vec![init.clone(); n];
        let weights = vec![1.0; n];
        let all_rows: Vec<usize> = (0..n).collect();
        let mut stages = Vec::with_capacity(params.n_stages);
        let mut train_loss = Vec::with_capacity(params.n_stages);
        let mut residual = vec![0.0; n];
        let kf = n_classes as f64;

        for _ in 0..params.n_stages {
            let probs: Vec<Vec<f64>> = if binary {
                raw.iter().map(|r| vec![sigmoid(r[0])]).collect()
            } else {
                raw.iter().map(|r| softmax(r)).collect()
            };
            let mut stage = Vec::with_capacity(outputs);
            for k in 0..outputs {
                let target_class = if binary { 1 } else { k };
                for i in 0..n {
                    let yk = if y[i] == target_class { 1.0 } else { 0.0 };
                    residual[i] = yk - probs[i][k];
                }
                let mut tree = grow_regressor(&cols, &residual, &weights, all_rows.clone(), tree_params);
                let mut num = vec![0.0; tree.nodes().len()];
                let mut den = vec![0.0; tree.nodes().len()];
                let mut leaf_of = vec![0usize; n];
                for i in 0..n {
                    let leaf = tree.leaf_index(&x.row(i).to_vec());
                    leaf_of[i] = leaf;
                    let r = residual[i];
                    num[leaf] += r;
                    den[leaf] += if binary {
                        probs[i][0] * (1.0 - probs[i][0])
                    } else {
                        r.abs() * (1.0 - r.abs())
                    };
                }
                let scale = if binary { 1.0 } else { (kf - 1.0) / kf };
                for leaf in 0..num.len() {
                    let v = if den[leaf].abs() < DENOM_FLOOR {
                        0.0
                    } else {
                        scale * num[leaf] / den[leaf]
                    };
                    tree.set_leaf_value(leaf, vec![v]);
                }
                for i in 0..n {
                    let v = match &tree.nodes()[leaf_of[i]] {
                        super::tree::Node::Leaf { value } => value[0],
                        _ => unreachable!(),
                    };
                    raw[i][k] += params.learning_rate * v;
                }
                stage.push(tree);
            }
            stages.push(stage);
            train_loss.push(log_loss(&raw, y, binary));
        }
        BoostingModel {
            n_classes,
            learning_rate: params.learning_rate,
            init,
            stages,
            train_loss,
        }
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn stages(&self) -> &[Vec<Tree>] {
        &self.stages
    }

    pub fn train_loss(&self) -> &[f64] {
        &self.train_loss
    }

    pub fn raw_score(&self, row: &[f64]) -> Vec<f64> {
        let mut raw = self.init.clone();
        for stage in &self.stages {
            for (k, tree) in stage.iter().enumerate() {
                raw[k] += self.learning_rate * tree.leaf_value(row)[0];
            }
        }
        raw
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<usize> {
        x.rows()
            .into_iter()
            .map(|r| {
                let raw = self.raw_score(&r.to_vec());
                if self.n_classes == 2 {
                    usize::from(raw[0] > 0.0)
                } else {
                    argmax(&raw)
                }
            })
            .collect()
    }
}
