//! Negative-sampling skip-gram objective over node embeddings.
//!
//! Per positive `(u, v)` with negatives `w_1..w_K` the minimized loss is
//! `-log s(z_u . z_v) - sum_k log s(-z_u . z_wk)`, `s` the logistic function.

use rand::Rng;

use crate::matrix::{axpy, dot, Matrix};
use crate::rng;

#[derive(Debug, Clone)]
pub struct SkipGramBatch {
    pub positives: Vec<(usize, usize)>,
    /// `K` negatives per positive, row-major.
    pub negatives: Vec<usize>,
    pub k: usize,
}

impl SkipGramBatch {
    /// Draws `k` negatives per positive uniformly from `[0, n)`, excluding the
    /// positive's context node.
    pub fn sample<R: Rng>(positives: Vec<(usize, usize)>, n: usize, k: usize, rng: &mut R) -> Self {
        assert!(n >= 2, "negative sampling needs at least two nodes");
        let mut negatives = Vec::with_capacity(positives.len() * k);
        for &(_, v) in &positives {
            for _ in 0..k {
                let w = loop {
                    let w = rng.random_range(0..n);
                    if w != v {
                        break w;
                    }
                };
                negatives.push(w);
            }
        }
        Self {
            positives,
            negatives,
            k,
        }
    }

    pub fn negatives_of(&self, i: usize) -> &[usize] {
        &self.negatives[i * self.k..(i + 1) * self.k]
    }
}

/// `-log s(x)`, stable for large `|x|`.
#[inline]
fn neg_log_sigmoid(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    crate::diffusion::sigmoid(x)
}

/// Summed loss and its gradient w.r.t. `z`.
pub fn skipgram_loss(z: &Matrix, batch: &SkipGramBatch) -> (f64, Matrix) {
    let mut grad = Matrix::zeros(z.rows(), z.cols());
    let mut loss = 0.0;
    for (i, &(u, v)) in batch.positives.iter().enumerate() {
        let (zu, zv) = (z.row(u), z.row(v));
        let s = dot(zu, zv);
        loss += neg_log_sigmoid(s);
        let g = sigmoid(s) - 1.0;
        axpy(g, zv, grad.row_mut(u));
        axpy(g, zu, grad.row_mut(v));
        for &w in batch.negatives_of(i) {
            let zw = z.row(w);
            let s = dot(zu, zw);
            loss += neg_log_sigmoid(-s);
            let g = sigmoid(s);
            axpy(g, zw, grad.row_mut(u));
            axpy(g, zu, grad.row_mut(w));
        }
    }
    (loss, grad)
}

/// Samples `k` negatives per positive with `rng_seed` and evaluates the loss.
pub fn skipgram_objective(
    z: &Matrix,
    positives: &[(usize, usize)],
    k: usize,
    rng_seed: u64,
) -> (f64, Matrix) {
    let batch = SkipGramBatch::sample(positives.to_vec(), z.rows(), k, &mut rng::rng(rng_seed));
    skipgram_loss(z, &batch)
}
