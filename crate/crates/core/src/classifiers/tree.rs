//! CART trees in an index arena: Gini classification trees and
//! Friedman-MSE regression trees. Samples go left when `x <= threshold`.

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Class proportions for classification, `[value]` for regression.
    Leaf { value: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` means all.
    pub max_features: Option<usize>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Index of the leaf reached by `row`.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { .. } => return i,
            }
        }
    }

    pub fn leaf_value(&self, row: &[f64]) -> &[f64] {
        match &self.nodes[self.leaf_index(row)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    pub(crate) fn set_leaf_value(&mut self, node: usize, v: Vec<f64>) {
        if let Node::Leaf { value } = &mut self.nodes[node] {
            *value = v;
        }
    }

    /// Largest number of splits on any root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

/// Column-major copy of the training matrix so each feature is contiguous.
pub(crate) struct Columns {
    data: Vec<f64>,
    n_rows: usize,
    n_features: usize,
}

impl Columns {
    pub fn new(x: ArrayView2<f64>) -> Self {
        let (n_rows, n_features) = x.dim();
        let mut data = Vec::with_capacity(n_rows * n_features);
        for f in 0..n_features {
            data.extend(x.column(f).iter());
        }
        Columns {
            data,
            n_rows,
            n_features,
        }
    }

    fn col(&self, f: usize) -> &[f64] {
        &self.data[f * self.n_rows..(f + 1) * self.n_rows]
    }
}

enum Target<'a> {
    Classes { y: &'a [usize], n_classes: usize },
    Values(&'a [f64]),
}

struct Builder<'a> {
    cols: &'a Columns,
    target: Target<'a>,
    weights: &'a [f64],
    params: TreeParams,
    rng: Option<&'a mut ChaCha8Rng>,
    nodes: Vec<Node>,
    buf: Vec<(f64, usize)>,
    features: Vec<usize>,
}

struct BestSplit {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn leaf_value(&self, rows: &[usize]) -> Vec<f64> {
        match self.target {
            Target::Classes { y, n_classes } => {
                let mut counts = vec![0.0; n_classes];
                let mut total = 0.0;
                for &r in rows {
                    counts[y[r]] += self.weights[r];
                    total += self.weights[r];
                }
                counts.iter_mut().for_each(|c| *c /= total);
                counts
            }
            Target::Values(t) => {
                let (mut s, mut w) = (0.0, 0.0);
                for &r in rows {
                    s += self.weights[r] * t[r];
                    w += self.weights[r];
                }
                vec![s / w]
            }
        }
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        match self.target {
            Target::Classes { y, .. } => rows.iter().all(|&r| y[r] == y[rows[0]]),
            Target::Values(t) => rows.iter().all(|&r| t[r] == t[rows[0]]),
        }
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: Vec::new() });
        let can_split = depth < self.params.max_depth
            && rows.len() >= self.params.min_samples_split
            && rows.len() >= 2 * self.params.min_samples_leaf
            && !self.is_pure(&rows);
        let best = if can_split { self.best_split(&rows) } else { None };
        match best {
            None => {
                let value = self.leaf_value(&rows);
                self.nodes[id] = Node::Leaf { value };
            }
            Some(b) => {
                let col = self.cols.col(b.feature);
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| col[i] <= b.threshold);
                drop(rows);
                let left = self.grow(l, depth + 1);
                let right = self.grow(r, depth + 1);
                self.nodes[id] = Node::Split {
                    feature: b.feature,
                    threshold: b.threshold,
                    left,
                    right,
                };
            }
        }
        id
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<BestSplit> {
        let n_features = self.cols.n_features;
        let limit = self.params.max_features.unwrap_or(n_features).clamp(1, n_features);
        if let Some(rng) = self.rng.as_deref_mut() {
            self.features.shuffle(rng);
        }
        let mut best: Option<BestSplit> = None;
        let mut evaluated = 0;
        for k in 0..n_features {
            if evaluated >= limit {
                break;
            }
            let f = self.features[k];
            let col = self.cols.col(f);
            self.buf.clear();
            self.buf.extend(rows.iter().map(|&r| (col[r], r)));
            self.buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            if self.buf[0].0 == self.buf[self.buf.len() - 1].0 {
                continue; // constant within this node
            }
            evaluated += 1;
            if let Some((score, threshold)) = self.scan(&self.buf) {
                if best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(BestSplit {
                        score,
                        feature: f,
                        threshold,
                    });
                }
            }
        }
        best
    }

    /// Best split along sorted `(value, row)` pairs; higher score is better.
    fn scan(&self, sorted: &[(f64, usize)]) -> Option<(f64, f64)> {
        let n = sorted.len();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let mut best: Option<(f64, f64)> = None;
        let mut consider = |i: usize, score: f64| {
            if i + 1 < min_leaf || n - i - 1 < min_leaf || sorted[i].0 >= sorted[i + 1].0 {
                return;
            }
            if best.is_none_or(|(s, _)| score > s) {
                let (a, b) = (sorted[i].0, sorted[i + 1].0);
                let mut mid = a + (b - a) / 2.0;
                if mid >= b || !mid.is_finite() {
                    mid = a;
                }
                best = Some((score, mid));
            }
        };
        match self.target {
            Target::Classes { y, n_classes } => {
                let mut total = vec![0.0; n_classes];
                let mut w_total = 0.0;
                for &(_, r) in sorted {
                    total[y[r]] += self.weights[r];
                    w_total += self.weights[r];
                }
                let mut left = vec![0.0; n_classes];
                let mut right = total.clone();
                let mut sq_left = 0.0;
                let mut sq_right: f64 = total.iter().map(|c| c * c).sum();
                let mut w_left = 0.0;
                for (i, &(_, r)) in sorted[..n - 1].iter().enumerate() {
                    let (c, w) = (y[r], self.weights[r]);
                    sq_left += (left[c] + w).powi(2) - left[c].powi(2);
                    sq_right += (right[c] - w).powi(2) - right[c].powi(2);
                    left[c] += w;
                    right[c] -= w;
                    w_left += w;
                    let w_right = w_total - w_left;
                    if w_left <= 0.0 || w_right <= 0.0 {
                        continue;
                    }
                    // maximising this minimises the weighted Gini impurity
                    consider(i, sq_left / w_left + sq_right / w_right);
                }
            }
            Target::Values(t) => {
                let (mut s_total, mut w_total) = (0.0, 0.0);
                for &(_, r) in sorted {
                    s_total += self.weights[r] * t[r];
                    w_total += self.weights[r];
                }
                let (mut s_left, mut w_left) = (0.0, 0.0);
                for (i, &(_, r)) in sorted[..n - 1].iter().enumerate() {
                    s_left += self.weights[r] * t[r];
                    w_left += self.weights[r];
                    let w_right = w_total - w_left;
                    if w_left <= 0.0 || w_right <= 0.0 {
                        continue;
                    }
                    let diff = s_left / w_left - (s_total - s_left) / w_right;
                    consider(i, w_left * w_right * diff * diff / w_total);
                }
            }
        }
        best
    }
}

fn build(
    cols: &Columns,
    target: Target<'_>,
    weights: &[f64],
    rows: Vec<usize>,
    params: TreeParams,
    rng: Option<&mut ChaCha8Rng>,
) -> Tree {
    let mut b = Builder {
        cols,
        target,
        weights,
        params,
        rng,
        nodes: Vec::new(),
        buf: Vec::with_capacity(rows.len()),
        features: (0..cols.n_features).collect(),
    };
    b.grow(rows, 0);
    Tree { nodes: b.nodes }
}

/// Gini classification tree over `rows` (weights of 0 may be omitted from
/// `rows`). `rng` is needed only when `max_features` subsamples.
pub(crate) fn grow_classifier(
    cols: &Columns,
    y: &[usize],
    n_classes: usize,
    weights: &[f64],
    rows: Vec<usize>,
    params: TreeParams,
    rng: Option<&mut ChaCha8Rng>,
) -> Tree {
    build(cols, Target::Classes { y, n_classes }, weights, rows, params, rng)
}

/// Least-squares regression tree with Friedman's improvement score.
pub(crate) fn grow_regressor(cols: &Columns, targets: &[f64], weights: &[f64], rows: Vec<usize>, params: TreeParams) -> Tree {
    build(cols, Target::Values(targets), weights, rows, params, None)
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for DecisionTreeParams {
    fn default() -> Self {
        DecisionTreeParams {
            max_depth: 3,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    tree: Tree,
}

impl DecisionTreeModel {
    pub fn fit(x: ArrayView2<f64>, y: &[usize], n_classes: usize, params: &DecisionTreeParams) -> Self {
        let cols = Columns::new(x);
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_split: params.min_samples_split,
            min_samples_leaf: params.min_samples_leaf,
            max_features: None,
        };
        let weights = vec![1.0; y.len()];
        let tree = grow_classifier(&cols, y, n_classes, &weights, (0..y.len()).collect(), tree_params, None);
        DecisionTreeModel { tree }
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<usize> {
        x.rows()
            .into_iter()
            .map(|r| argmax(self.tree.leaf_value(&r.to_vec())))
            .collect()
    }
}
