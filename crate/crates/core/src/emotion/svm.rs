//! Linear SVM trained by Pegasos stochastic sub-gradient descent.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::rng_from;

/// Sparse attribute row as `(column, value)` pairs.
pub type SparseRow = Vec<(u32, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PegasosParams {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for PegasosParams {
    fn default() -> Self {
        PegasosParams { lambda: 1e-4, epochs: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearHead {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Set when training saw no positive example; the head always says no.
    pub constant_negative: bool,
    /// Regularized hinge objective of the averaged iterate after each epoch.
    pub objective_history: Vec<f64>,
}

pub fn logistic(m: f64) -> f64 {
    1.0 / (1.0 + (-m).exp())
}

impl LinearHead {
    pub fn constant(dim: usize) -> Self {
        LinearHead { weights: vec![0.0; dim], bias: -1.0, constant_negative: true, objective_history: Vec::new() }
    }

    pub fn margin(&self, row: &[f64]) -> f64 {
        self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    pub fn margin_sparse(&self, row: &SparseRow) -> f64 {
        row.iter().map(|&(j, x)| self.weights[j as usize] * x).sum::<f64>() + self.bias
    }
}

fn objective(w: &[f64], rows: &[SparseRow], labels: &[bool], lambda: f64) -> f64 {
    let dim = w.len() - 1;
    let norm2: f64 = w.iter().map(|v| v * v).sum();
    let hinge: f64 = rows
        .iter()
        .zip(labels)
        .map(|(r, &l)| {
            let m = r.iter().map(|&(j, x)| w[j as usize] * x).sum::<f64>() + w[dim];
            (1.0 - if l { m } else { -m }).max(0.0)
        })
        .sum();
    0.5 * lambda * norm2 + hinge / rows.len() as f64
}

/// Trains one head with step size `1 / (λ t)`, projection onto the ball of
/// radius `1 / √λ` and a seeded shuffle per epoch. The bias is an extra
/// constant-one column, regularized like the others. Returns the average of
/// all iterates, kept exactly in `O(nnz)` per step: with `w_t = s_t v_t`,
/// the running sum is `B v − C` where `B = Σ s` and `C` absorbs each sparse
/// change of `v`.
pub fn train_pegasos(rows: &[SparseRow], labels: &[bool], dim: usize, params: &PegasosParams, seed: u64) -> LinearHead {
    assert_eq!(rows.len(), labels.len());
    if rows.is_empty() || !labels.iter().any(|&l| l) {
        return LinearHead::constant(dim);
    }
    let lambda = params.lambda;
    let radius2 = 1.0 / lambda;
    let d = dim + 1;
    let mut v = vec![0.0; d];
    let mut c = vec![0.0; d];
    let (mut s, mut b, mut norm2) = (1.0f64, 0.0f64, 0.0f64);
    let mut rng = rng_from(seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut t = 0usize;
    let mut history = Vec::with_capacity(params.epochs);
    let bias_entry = [(dim as u32, 1.0)];
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = &rows[i];
            let y = if labels[i] { 1.0 } else { -1.0 };
            let margin = s * (row.iter().map(|&(j, x)| v[j as usize] * x).sum::<f64>() + v[dim]);
            if t > 1 {
                s *= 1.0 - 1.0 / t as f64;
            }
            if y * margin < 1.0 {
                for &(j, x) in row.iter().chain(bias_entry.iter()) {
                    let j = j as usize;
                    let delta = eta * y * x / s;
                    norm2 += delta * (2.0 * v[j] + delta);
                    c[j] += b * delta;
                    v[j] += delta;
                }
            }
            let w2 = s * s * norm2;
            if w2 > radius2 {
                s *= (radius2 / w2).sqrt();
            }
            b += s;
            if s < 1e-6 {
                // fold the scale into v and the running sum into c, so B and v stay moderate
                for (vj, cj) in v.iter_mut().zip(c.iter_mut()) {
                    *cj -= b * *vj;
                    *vj *= s;
                }
                norm2 = v.iter().map(|x| x * x).sum();
                b = 0.0;
                s = 1.0;
            }
        }
        let avg: Vec<f64> = v.iter().zip(&c).map(|(vj, cj)| (b * vj - cj) / t as f64).collect();
        history.push(objective(&avg, rows, labels, lambda));
    }
    if t == 0 {
        return LinearHead::constant(dim);
    }
    let mut weights: Vec<f64> = v.iter().zip(&c).map(|(vj, cj)| (b * vj - cj) / t as f64).collect();
    let bias = weights.pop().expect("bias column");
    LinearHead { weights, bias, constant_negative: false, objective_history: history }
}
