//! k-nearest neighbours with uniform votes and Euclidean distance.
//! Equal distances order by class index, then by training row; vote ties go
//! to the lowest class index.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::tree::argmax;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    n_classes: usize,
    width: usize,
    rows: Vec<f64>,
    labels: Vec<usize>,
}

impl KnnModel {
    pub fn fit(x: ArrayView2<f64>, y: &[usize], n_classes: usize, params: &KnnParams) -> Self {
        KnnModel {
            k: params.k,
            n_classes,
            width: x.ncols(),
            rows: x.iter().copied().collect(),
            labels: y.to_vec(),
        }
    }

    /// `(squared distance, class, row)` of the `k` nearest training rows.
    pub fn neighbours(&self, query: &[f64]) -> Vec<(f64, usize, usize)> {
        let mut d: Vec<(f64, usize, usize)> = self
            .rows
            .chunks(self.width.max(1))
            .enumerate()
            .map(|(r, row)| {
                let dist: f64 = row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
                (dist, self.labels[r], r)
            })
            .collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize, usize), b: &(f64, usize, usize)| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
        };
        if k < d.len() {
            d.select_nth_unstable_by(k, cmp);
            d.truncate(k);
        }
        d.sort_unstable_by(cmp);
        d
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<usize> {
        x.rows()
            .into_iter()
            .map(|q| {
                let mut votes = vec![0.0; self.n_classes];
                for (_, c, _) in self.neighbours(&q.to_vec()) {
                    votes[c] += 1.0;
                }
                argmax(&votes)
            })
            .collect()
    }
}
