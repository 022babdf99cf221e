//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
}

pub fn to_dmatrix(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Macro precision, recall and F1 straight from the definitions, by
/// counting (label, prediction) pairs for each class.
pub fn brute_force_macro(labels: &[usize], preds: &[usize], n_classes: usize) -> (f64, f64, f64) {
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let (mut p_sum, mut r_sum, mut f_sum) = (0.0, 0.0, 0.0);
    for c in 0..n_classes {
        let tp = labels.iter().zip(preds).filter(|&(&l, &p)| l == c && p == c).count();
        let predicted = preds.iter().filter(|&&p| p == c).count();
        let actual = labels.iter().filter(|&&l| l == c).count();
        let p = ratio(tp, predicted);
        let r = ratio(tp, actual);
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        p_sum += p;
        r_sum += r;
        f_sum += f;
    }
    let k = n_classes as f64;
    (p_sum / k, r_sum / k, f_sum / k)
}

/// Calls `f` with every assignment of `n` positions to `k` values.
pub fn for_each_assignment(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut digits = vec![0usize; n];
    loop {
        f(&digits);
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            digits[i] += 1;
            if digits[i] < k {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Principal axes and variances from the eigendecomposition of the sample
/// covariance, sorted by decreasing variance.
pub struct EigenPca {
    pub variances: Vec<f64>,
    pub axes: Vec<DVector<f64>>,
}

pub fn covariance_eigen(data: &Array2<f64>) -> EigenPca {
    let x = to_dmatrix(data);
    let n = x.nrows();
    let mean = x.row_mean();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let denom = (n.max(2) - 1) as f64;
    let cov = centered.transpose() * &centered / denom;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    EigenPca {
        variances: order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect(),
        axes: order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect(),
    }
}

/// Dominant right singular vector of the column-centred (or raw) matrix.
pub fn dominant_right_singular(data: &Array2<f64>, centered: bool) -> (DVector<f64>, f64, f64) {
    let mut x = to_dmatrix(data);
    if centered {
        let mean = x.row_mean();
        for mut row in x.row_iter_mut() {
            row -= &mean;
        }
    }
    let svd = x.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s1 = svd.singular_values[order[0]];
    let s2 = order.get(1).map_or(0.0, |&i| svd.singular_values[i]);
    (v_t.row(order[0]).transpose().into_owned(), s1, s2)
}

pub fn abs_cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).abs()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Negative-sampling loss written out directly:
/// `-ln σ(u⁺·v) - Σ ln σ(-uⱼ·v)`.
pub fn ns_loss(input: &[f64], positive: &[f64], negatives: &[Vec<f64>]) -> f64 {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let softplus = |x: f64| (1.0 + x.exp()).ln();
    let mut loss = softplus(-dot(positive, input));
    for u in negatives {
        loss += softplus(dot(u, input));
    }
    loss
}

/// Central finite differences of `f` at `x`.
pub fn central_diff(x: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut work = x.to_vec();
    (0..x.len())
        .map(|i| {
            work[i] = x[i] + h;
            let up = f(&work);
            work[i] = x[i] - h;
            let down = f(&work);
            work[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest element-wise relative error, with a floor on the denominator so
/// near-zero entries compare absolutely.
pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Compares `fit_pca` at full rank with the covariance eigen oracle.
/// Axes are compared where the variance is non-negligible and separated
/// from its neighbours (elsewhere the axis is not unique).
pub fn pca_oracle_mismatch(data: &Array2<f64>) -> Option<String> {
    let (n, p) = data.dim();
    let rank = n.min(p);
    let model = match embedbench::pca::fit_pca(data.view(), rank) {
        Ok(m) => m,
        Err(e) => return Some(format!("{n}x{p}: {e}")),
    };
    let oracle = covariance_eigen(data);
    let top = oracle.variances[0].max(1e-300);
    for k in 0..rank {
        let got = model.explained_variance()[k];
        let want = oracle.variances[k];
        if (got - want).abs() > 1e-8 {
            return Some(format!("{n}x{p} variance {k}: {got} vs {want}"));
        }
        let prev_gap = if k == 0 { f64::INFINITY } else { oracle.variances[k - 1] - want };
        let next_gap = oracle.variances.get(k + 1).map_or(f64::INFINITY, |v| want - v);
        if want > 1e-9 * top && prev_gap.min(next_gap) > 1e-6 * top {
            let axis: Vec<f64> = model.components().row(k).to_vec();
            let c = abs_cos(&axis, oracle.axes[k].as_slice());
            if c <= 1.0 - 1e-8 {
                return Some(format!("{n}x{p} axis {k}: |cos| = {c}"));
            }
        }
    }
    None
}

/// Compares `first_component_weights` with the dominant right singular
/// vector of the centred matrix (up to sign), when that vector is unique.
pub fn first_pc_oracle_mismatch(data: &Array2<f64>) -> Option<String> {
    let (v, s1, s2) = dominant_right_singular(data, true);
    if data.ncols() < 2 || s1 - s2 <= 1e-6 * s1.max(1e-300) {
        return None;
    }
    let m = match embedbench::features::TermMatrix::new(data.clone()) {
        Ok(m) => m,
        Err(e) => return Some(e.to_string()),
    };
    let w = embedbench::pca::first_component_weights(&m).weights;
    let c = abs_cos(&w, v.as_slice());
    (c <= 1.0 - 1e-8).then(|| format!("{}x{} first pc |cos| = {c}", data.nrows(), data.ncols()))
}

/// Random negative-sampling group: input vector, positive output vector and
/// 1–10 negative output vectors of a random width.
pub fn random_ns_group(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let dim = rng.random_range(2..=40);
    let scale = 1.0 / (dim as f64).sqrt();
    let vec = |rng: &mut ChaCha8Rng| (0..dim).map(|_| rng.random_range(-2.0..2.0) * scale).collect::<Vec<f64>>();
    let input = vec(rng);
    let positive = vec(rng);
    let k = rng.random_range(1..=10);
    let negatives = (0..k).map(|_| vec(rng)).collect();
    (input, positive, negatives)
}

/// Worst relative error between an analytic group gradient and central
/// differences of [`ns_loss`] over every participating vector.
pub fn ns_gradient_error(
    input: &[f64],
    positive: &[f64],
    negatives: &[Vec<f64>],
    grad: &embedbench::embeddings::sgns::PairGradient,
) -> f64 {
    let h = 1e-5;
    let mut worst = max_rel_err(&grad.input, &central_diff(input, h, |v| ns_loss(v, positive, negatives)));
    worst = worst.max(max_rel_err(
        &grad.positive,
        &central_diff(positive, h, |u| ns_loss(input, u, negatives)),
    ));
    for j in 0..negatives.len() {
        let numeric = central_diff(&negatives[j], h, |u| {
            let mut negs = negatives.to_vec();
            negs[j] = u.to_vec();
            ns_loss(input, positive, &negs)
        });
        worst = worst.max(max_rel_err(&grad.negatives[j], &numeric));
    }
    let loss = ns_loss(input, positive, negatives);
    worst.max((grad.loss - loss).abs() / loss.abs().max(1e-6))
}

/// Splits on the longest root-to-leaf path, found by walking the arena.
pub fn walk_depth(tree: &embedbench::classifiers::Tree) -> usize {
    use embedbench::classifiers::tree::Node;
    fn go(nodes: &[Node], i: usize) -> usize {
        match &nodes[i] {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
        }
    }
    go(tree.nodes(), 0)
}

/// Two Gaussian-ish clusters per class in `dim` dimensions with labels
/// "c0", "c1", ...
pub fn clustered_data(rng: &mut ChaCha8Rng, n: usize, dim: usize, classes: usize) -> (Array2<f64>, Vec<String>) {
    let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let x = Array2::from_shape_fn((n, dim), |(i, j)| {
        let centre = if j % classes == labels[i] { 2.0 } else { 0.0 };
        centre + rng.random_range(-1.0..1.0)
    });
    (x, labels.iter().map(|c| format!("c{c}")).collect())
}

/// Dense features of `rep` for every row of `dataset`, fitted on all rows.
pub fn full_features(
    dataset: &embedbench::LabeledDataset,
    rep: embedbench::Representation,
    seed: u64,
) -> Array2<f64> {
    use embedbench::features::{fit_representation, FeatureSettings, RepresentationSpec};
    let rows: Vec<usize> = (0..dataset.len()).collect();
    let spec = RepresentationSpec::new(rep);
    let ext = embedbench::embeddings::external::synthetic_token_vectors(dataset, 384, seed);
    let fitted = fit_representation(dataset, &spec, &rows, &FeatureSettings::default(), Some(&ext), seed).unwrap();
    fitted.transform(dataset, &rows, Some(&ext), "test").unwrap().features.values().clone()
}
