//! Negative-sampling objective shared by the word and document trainers.
//!
//! For an input vector `v`, a positive output `u_o` and negatives `u_1..u_k`
//! the per-pair loss is
//!
//! ```text
//! L = -ln σ(u_o·v) - Σ_i ln σ(-u_i·v)
//! ```
//!
//! Its gradient is linear in the participating vectors: `∂L/∂u_j = c_j v`
//! and `∂L/∂v = Σ_j c_j u_j`, with `c_o = σ(u_o·v) - 1` and `c_i = σ(u_i·v)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::vocab::Vocabulary;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-ln σ(x)` without overflow.
#[inline]
pub fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Loss of one (input, positive, negatives) group and the scalar gradient
/// coefficients, positive first.
pub fn loss_and_coefficients(input: &[f64], outputs: &[&[f64]]) -> (f64, Vec<f64>) {
    let mut loss = 0.0;
    let coefs = outputs
        .iter()
        .enumerate()
        .map(|(j, u)| {
            let s = dot(u, input);
            if j == 0 {
                loss += neg_log_sigmoid(s);
                sigmoid(s) - 1.0
            } else {
                loss += neg_log_sigmoid(-s);
                sigmoid(s)
            }
        })
        .collect();
    (loss, coefs)
}

/// Full gradient of one negative-sampling group.
#[derive(Debug, Clone)]
pub struct PairGradient {
    pub loss: f64,
    pub input: Vec<f64>,
    pub positive: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn pair_gradient(input: &[f64], positive: &[f64], negatives: &[&[f64]]) -> PairGradient {
    let mut outputs = Vec::with_capacity(negatives.len() + 1);
    outputs.push(positive);
    outputs.extend_from_slice(negatives);
    let (loss, coefs) = loss_and_coefficients(input, &outputs);
    let mut grad_input = vec![0.0; input.len()];
    for (c, u) in coefs.iter().zip(&outputs) {
        axpy(*c, u, &mut grad_input);
    }
    let scaled = |c: f64| input.iter().map(|x| c * x).collect::<Vec<_>>();
    PairGradient {
        loss,
        input: grad_input,
        positive: scaled(coefs[0]),
        negatives: coefs[1..].iter().map(|&c| scaled(c)).collect(),
    }
}

/// Row-major table of output ("context") vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputTable {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl OutputTable {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        OutputTable {
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// One SGD step on a group. Updates the output rows in place (unless
/// `frozen_outputs`) and accumulates `-lr * ∂L/∂v` into `input_delta`.
/// Returns the loss before the update.
pub fn sgd_step(
    input: &[f64],
    outputs: &mut OutputTable,
    positive: usize,
    negatives: &[usize],
    lr: f64,
    input_delta: &mut [f64],
    frozen_outputs: bool,
) -> f64 {
    let mut loss = 0.0;
    let targets = std::iter::once((positive, true)).chain(negatives.iter().map(|&n| (n, false)));
    for (idx, is_positive) in targets {
        let u = outputs.row(idx);
        let s = dot(u, input);
        let coef = if is_positive {
            loss += neg_log_sigmoid(s);
            sigmoid(s) - 1.0
        } else {
            loss += neg_log_sigmoid(-s);
            sigmoid(s)
        };
        axpy(-lr * coef, u, input_delta);
        if !frozen_outputs {
            axpy(-lr * coef, input, outputs.row_mut(idx));
        }
    }
    loss
}

/// Draws negatives from the unigram distribution raised to 0.75.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(vocab: &Vocabulary) -> Self {
        let mut acc = 0.0;
        let cumulative = vocab
            .counts()
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        NegativeSampler { cumulative }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let r = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= r)
            .min(self.cumulative.len() - 1)
    }

    /// `k` negatives, never equal to `exclude` unless the vocabulary has one entry.
    pub fn fill(&self, rng: &mut ChaCha8Rng, k: usize, exclude: usize, out: &mut Vec<usize>) {
        out.clear();
        if self.cumulative.len() < 2 {
            return;
        }
        while out.len() < k {
            let n = self.sample(rng);
            if n != exclude {
                out.push(n);
            }
        }
    }
}

/// Linearly decaying learning rate, floored at `1e-4` of the start value.
pub fn decayed_lr(start: f64, step: u64, total_steps: u64) -> f64 {
    let progress = step as f64 / total_steps.max(1) as f64;
    start * (1.0 - progress).max(1e-4)
}

/// Uniform initialisation in `(-0.5/dim, 0.5/dim)`.
pub fn init_uniform(rng: &mut ChaCha8Rng, len: usize, dim: usize) -> Vec<f64> {
    let scale = 1.0 / dim as f64;
    (0..len).map(|_| (rng.random::<f64>() - 0.5) * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn stable_logistic_helpers() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!(neg_log_sigmoid(-800.0).is_finite());
        assert!((neg_log_sigmoid(800.0)).abs() < 1e-300);
        assert!((neg_log_sigmoid(0.3) + sigmoid(0.3).ln()).abs() < 1e-14);
    }

    #[test]
    fn sgd_step_matches_pair_gradient() {
        let mut rng = seed::rng(4);
        let dim = 6;
        let input = init_uniform(&mut rng, dim, 1);
        let mut table = OutputTable {
            dim,
            data: init_uniform(&mut rng, 3 * dim, 1),
        };
        let before = table.clone();
        let g = pair_gradient(&input, before.row(0), &[before.row(1), before.row(2)]);
        let mut delta = vec![0.0; dim];
        let loss = sgd_step(&input, &mut table, 0, &[1, 2], 0.1, &mut delta, false);
        assert!((loss - g.loss).abs() < 1e-14);
        for d in 0..dim {
            assert!((delta[d] + 0.1 * g.input[d]).abs() < 1e-14);
            assert!((table.row(0)[d] - (before.row(0)[d] - 0.1 * g.positive[d])).abs() < 1e-14);
            assert!((table.row(2)[d] - (before.row(2)[d] - 0.1 * g.negatives[1][d])).abs() < 1e-14);
        }
    }

    #[test]
    fn sampler_excludes_target_and_respects_support() {
        let corpus = vec![vec!["a".to_string(), "a".into(), "b".into(), "c".into()]];
        let vocab = Vocabulary::build(&corpus, 1);
        let sampler = NegativeSampler::new(&vocab);
        let mut rng = seed::rng(1);
        let mut out = Vec::new();
        for _ in 0..100 {
            sampler.fill(&mut rng, 5, 0, &mut out);
            assert_eq!(out.len(), 5);
            assert!(out.iter().all(|&n| n == 1 || n == 2));
        }
    }

    #[test]
    fn learning_rate_decays_linearly() {
        assert_eq!(decayed_lr(0.025, 0, 100), 0.025);
        assert!((decayed_lr(0.025, 50, 100) - 0.0125).abs() < 1e-15);
        assert!(decayed_lr(0.025, 100, 100) > 0.0);
    }
}
