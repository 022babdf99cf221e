//! Random forest: bootstrap rows, √p candidate features per split,
//! majority vote over the trees.

use ndarray::ArrayView2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{argmax, grow_classifier, Columns, Tree, TreeParams};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 300,
            max_depth: 7,
            min_samples_split: 2,
            min_samples_leaf: 1,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    n_classes: usize,
    trees: Vec<Tree>,
}

impl ForestModel {
    /// Tree `i` draws from its own stream seeded with `seed + i`, so the
    /// result does not depend on how the trees are scheduled.
    pub fn fit(x: ArrayView2<f64>, y: &[usize], n_classes: usize, params: &ForestParams, seed: u64) -> Self {
        let cols = Columns::new(x);
        let (n, p) = x.dim();
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_split: params.min_samples_split,
            min_samples_leaf: params.min_samples_leaf,
            max_features: Some(((p as f64).sqrt().floor() as usize).max(1)),
        };
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = seed::rng(seed.wrapping_add(i as u64));
                let mut weights = vec![0.0; n];
                if params.bootstrap {
                    for _ in 0..n {
                        weights[rng.random_range(0..n)] += 1.0;
                    }
                } else {
                    weights.fill(1.0);
                }
                let rows: Vec<usize> = (0..n).filter(|&r| weights[r] > 0.0).collect();
                grow_classifier(&cols, y, n_classes, &weights, rows, tree_params, Some(&mut rng))
            })
            .collect();
        ForestModel { n_classes, trees }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<usize> {
        x.rows()
            .into_iter()
            .map(|r| {
                let row = r.to_vec();
                let mut votes = vec![0.0; self.n_classes];
                for t in &self.trees {
                    votes[argmax(t.leaf_value(&row))] += 1.0;
                }
                argmax(&votes)
            })
            .collect()
    }
}
