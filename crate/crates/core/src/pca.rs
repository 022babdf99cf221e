//! Principal components via one-sided Jacobi SVD.
//!
//! Used two ways: corpus-level reduction of pooled document vectors
//! ([`fit_pca`]) and per-document term weighting
//! ([`first_component_weights`]).

use std::cmp::Ordering;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::TermMatrix;

/// Pair convergence threshold on |u_i·u_j| / (‖u_i‖‖u_j‖).
const OFF_DIAGONAL_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 60;

/// Right singular vectors and singular values of an `n × p` matrix, in
/// decreasing order of singular value.
#[derive(Debug, Clone)]
pub struct RightSvd {
    pub singular_values: Vec<f64>,
    /// `p × p`, column `k` is the k-th right singular vector.
    pub v: Array2<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

/// One-sided (Hestenes) Jacobi: rotate column pairs of `a` until all are
/// mutually orthogonal, accumulating the rotations into `V`.
pub fn jacobi_svd(a: ArrayView2<f64>) -> RightSvd {
    let (n, p) = a.dim();
    // column-major working copy
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| a.column(j).to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            e
        })
        .collect();
    let frob2: f64 = cols.iter().flatten().map(|x| x * x).sum();
    let negligible = (1e-15f64).powi(2) * frob2 * (n.max(1) as f64);

    let mut sweeps = 0;
    let mut converged = p < 2 || frob2 == 0.0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        converged = true;
        for i in 0..p - 1 {
            for j in i + 1..p {
                let (alpha, beta, gamma) = {
                    let (ci, cj) = (&cols[i], &cols[j]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for k in 0..n {
                        alpha += ci[k] * ci[k];
                        beta += cj[k] * cj[k];
                        gamma += ci[k] * cj[k];
                    }
                    (alpha, beta, gamma)
                };
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                if gamma.abs() <= OFF_DIAGONAL_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
    }

    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let mut vm = Array2::zeros((p, p));
    for (k, &src) in order.iter().enumerate() {
        for r in 0..p {
            vm[[r, k]] = v[src][r];
        }
    }
    RightSvd {
        singular_values: order.iter().map(|&k| norms[k]).collect(),
        v: vm,
        sweeps,
        converged,
    }
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(j);
    let (ci, cj) = (&mut lo[i], &mut hi[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let xi = *x;
        let yj = *y;
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PcaModelJson", try_from = "PcaModelJson")]
pub struct PcaModel {
    mean: Array1<f64>,
    /// `r × p`, orthonormal rows.
    components: Array2<f64>,
    explained_variance: Vec<f64>,
    n_samples: usize,
}

#[derive(Serialize, Deserialize)]
struct PcaModelJson {
    mean: Vec<f64>,
    components: Vec<Vec<f64>>,
    explained_variance: Vec<f64>,
    n_samples: usize,
}

impl From<PcaModel> for PcaModelJson {
    fn from(m: PcaModel) -> Self {
        PcaModelJson {
            mean: m.mean.to_vec(),
            components: m.components.outer_iter().map(|r| r.to_vec()).collect(),
            explained_variance: m.explained_variance,
            n_samples: m.n_samples,
        }
    }
}

impl TryFrom<PcaModelJson> for PcaModel {
    type Error = Error;

    fn try_from(j: PcaModelJson) -> Result<Self> {
        let p = j.mean.len();
        let r = j.components.len();
        if j.components.iter().any(|row| row.len() != p) || j.explained_variance.len() != r {
            return Err(Error::Parse("inconsistent PCA model shapes".into()));
        }
        let flat: Vec<f64> = j.components.into_iter().flatten().collect();
        Ok(PcaModel {
            mean: Array1::from(j.mean),
            components: Array2::from_shape_vec((r, p), flat).expect("checked shape"),
            explained_variance: j.explained_variance,
            n_samples: j.n_samples,
        })
    }
}

impl PcaModel {
    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    pub fn components(&self) -> &Array2<f64> {
        &self.components
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn rank(&self) -> usize {
        self.components.nrows()
    }

    pub fn input_width(&self) -> usize {
        self.mean.len()
    }

    /// `(data - mean) · componentsᵀ`
    pub fn transform(&self, data: ArrayView2<f64>) -> Result<Array2<f64>> {
        if data.ncols() != self.input_width() {
            return Err(Error::DimensionMismatch {
                expected: self.input_width(),
                found: data.ncols(),
            });
        }
        let centered = &data - &self.mean.view().insert_axis(Axis(0));
        Ok(centered.dot(&self.components.t()))
    }

    pub fn inverse_transform(&self, scores: ArrayView2<f64>) -> Result<Array2<f64>> {
        if scores.ncols() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: scores.ncols(),
            });
        }
        Ok(scores.dot(&self.components) + &self.mean.view().insert_axis(Axis(0)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Fits a rank-`rank` PCA. Each component's sign is fixed so its
/// largest-magnitude loading is positive.
pub fn fit_pca(data: ArrayView2<f64>, rank: usize) -> Result<PcaModel> {
    let (n, p) = data.dim();
    if n == 0 || p == 0 {
        return Err(Error::InvalidDataset("PCA needs at least one row and column".into()));
    }
    if rank == 0 {
        return Err(Error::InvalidHyperparameter("PCA rank must be at least 1".into()));
    }
    if rank > n.min(p) {
        return Err(Error::RankTooLarge {
            requested: rank,
            max: n.min(p),
        });
    }
    let mean = data.mean_axis(Axis(0)).expect("n >= 1");
    let centered = &data - &mean.view().insert_axis(Axis(0));
    let svd = jacobi_svd(centered.view());
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };

    let mut components = Array2::zeros((rank, p));
    for k in 0..rank {
        let col = svd.v.column(k);
        let lead = col
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |best, (i, &x)| if x.abs() > best.1.abs() { (i, x) } else { best });
        let sign = if lead.1 < 0.0 { -1.0 } else { 1.0 };
        components.row_mut(k).assign(&col.mapv(|x| sign * x));
    }
    let explained_variance = svd.singular_values[..rank]
        .iter()
        .map(|s| s * s / denom)
        .collect();
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        n_samples: n,
    })
}

/// Unit-norm weights over a document's terms.
#[derive(Debug, Clone, PartialEq)]
pub struct PcWeights {
    pub weights: Vec<f64>,
    pub sign_flipped: bool,
}

/// Weights plus the combined vector `A·w`, both computed in a canonical
/// column order so the result does not depend on term order.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct FirstComponent {
    pub weights: PcWeights,
    pub combined: Vec<f64>,
}

/// First principal direction in term space: rows of the `m × n_d` matrix are
/// observations, columns (terms) are variables.
pub fn first_component_weights(matrix: &TermMatrix) -> PcWeights {
    first_component(matrix, true).weights
}

/// As [`first_component_weights`], optionally skipping column centring.
pub fn first_component_weights_with(matrix: &TermMatrix, centered: bool) -> PcWeights {
    first_component(matrix, centered).weights
}

pub(crate) fn first_component(matrix: &TermMatrix, centered: bool) -> FirstComponent {
    let a = matrix.values();
    let (m, n_d) = a.dim();
    if n_d == 1 {
        return FirstComponent {
            weights: PcWeights {
                weights: vec![1.0],
                sign_flipped: false,
            },
            combined: a.column(0).to_vec(),
        };
    }

    // canonical order: columns sorted lexicographically by value
    let mut order: Vec<usize> = (0..n_d).collect();
    order.sort_by(|&x, &y| {
        a.column(x)
            .iter()
            .zip(a.column(y).iter())
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    });
    let mut canon = Array2::zeros((m, n_d));
    for (k, &src) in order.iter().enumerate() {
        canon.column_mut(k).assign(&a.column(src));
    }
    let mut work = canon.clone();
    if centered {
        let means = work.mean_axis(Axis(0)).expect("m >= 1");
        work -= &means.insert_axis(Axis(0));
    }

    let all_equal = (1..n_d).all(|k| canon.column(k) == canon.column(0));
    let frob_a = canon.iter().map(|x| x * x).sum::<f64>().sqrt();
    let frob_c = work.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut w_canon: Vec<f64> = if all_equal || frob_c <= 1e-12 * frob_a || frob_c == 0.0 {
        vec![1.0 / (n_d as f64).sqrt(); n_d]
    } else {
        jacobi_svd(work.view()).v.column(0).to_vec()
    };

    let combine = |w: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (k, &wk) in w.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(canon.column(k)) {
                *o += wk * x;
            }
        }
        out
    };
    let mut combined = combine(&w_canon);
    let column_sum: Vec<f64> = (0..m).map(|r| canon.row(r).sum()).collect();
    let alignment: f64 = combined.iter().zip(&column_sum).map(|(x, y)| x * y).sum();
    let flip = if alignment != 0.0 {
        alignment < 0.0
    } else {
        let lead = w_canon
            .iter()
            .fold(0.0f64, |best, &x| if x.abs() > best.abs() { x } else { best });
        lead < 0.0
    };
    if flip {
        w_canon.iter_mut().for_each(|x| *x = -*x);
        combined.iter_mut().for_each(|x| *x = -*x);
    }

    let mut weights = vec![0.0; n_d];
    for (k, &src) in order.iter().enumerate() {
        weights[src] = w_canon[k];
    }
    FirstComponent {
        weights: PcWeights {
            weights,
            sign_flipped: flip,
        },
        combined,
    }
}
