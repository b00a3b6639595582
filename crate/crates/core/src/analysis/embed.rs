//! Exact t-SNE and a PCA fallback, both mapping rows to the plane.

use std::io::Write;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::rng::rng_from;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    /// `None` picks `max(n / early_exaggeration / 4, 50)`.
    pub learning_rate: Option<f64>,
    pub early_exaggeration: f64,
    pub exaggeration_iters: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub momentum_switch_iter: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: None,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            momentum_switch_iter: 250,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Embedding2D {
    pub points: Vec<[f64; 2]>,
    /// Group label per point; empty when the caller has none.
    pub labels: Vec<String>,
    /// KL(P || Q) after every t-SNE iteration; empty for PCA.
    pub kl_history: Vec<f64>,
}

impl Embedding2D {
    pub fn final_kl(&self) -> Option<f64> {
        self.kl_history.last().copied()
    }

    /// `id,x,y,group`.
    pub fn write_csv<W: Write>(&self, writer: W, ids: &[String]) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["id", "x", "y", "group"])?;
        for (i, p) in self.points.iter().enumerate() {
            let id = ids.get(i).cloned().unwrap_or_else(|| i.to_string());
            let group = self.labels.get(i).map(String::as_str).unwrap_or("");
            w.write_record([id.as_str(), &p[0].to_string(), &p[1].to_string(), group])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_rows(points: &[Vec<f64>]) -> Result<usize, AnalysisError> {
    let d = points.first().map_or(0, Vec::len);
    if points.iter().any(|p| p.len() != d) {
        return Err(AnalysisError::Ragged);
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    Ok(d)
}

fn squared_distances(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .par_iter()
        .map(|a| points.iter().map(|b| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()).collect())
        .collect()
}

/// Conditional probabilities of row `i` whose entropy matches `ln(perplexity)`.
fn conditional_row(dist: &[f64], i: usize, perplexity: f64) -> Vec<f64> {
    const TOL: f64 = 1e-5;
    let target = perplexity.ln();
    let d_min = dist.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
    let mut beta = 1.0;
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    let mut row = vec![0.0; dist.len()];
    for _ in 0..200 {
        let mut sum = 0.0;
        let mut weighted = 0.0;
        for (j, &d) in dist.iter().enumerate() {
            if j == i {
                row[j] = 0.0;
                continue;
            }
            let shifted = d - d_min;
            let v = (-beta * shifted).exp();
            row[j] = v;
            sum += v;
            weighted += shifted * v;
        }
        let entropy = sum.ln() + beta * weighted / sum;
        for v in row.iter_mut() {
            *v /= sum;
        }
        let diff = entropy - target;
        if diff.abs() < TOL {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_infinite() { beta * 2.0 } else { (beta + hi) / 2.0 };
        } else {
            hi = beta;
            beta = (beta + lo) / 2.0;
        }
    }
    row
}

/// Symmetrized joint probabilities `(P_{j|i} + P_{i|j}) / 2n`, floored at 1e-12.
fn joint_probabilities(points: &[Vec<f64>], perplexity: f64) -> Vec<Vec<f64>> {
    let n = points.len();
    let dist = squared_distances(points);
    let cond: Vec<Vec<f64>> = (0..n).into_par_iter().map(|i| conditional_row(&dist[i], i, perplexity)).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { ((cond[i][j] + cond[j][i]) / (2.0 * n as f64)).max(1e-12) })
                .collect()
        })
        .collect()
}

/// `Σ p log q` and the KL gradient at `y`, with `p` scaled by `exaggeration`
/// in the gradient only. Rows are reduced in index order.
fn kl_gradient(p: &[Vec<f64>], y: &[[f64; 2]], exaggeration: f64) -> (f64, Vec<[f64; 2]>) {
    let n = y.len();
    let num: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        let dx = y[i][0] - y[j][0];
                        let dy = y[i][1] - y[j][1];
                        1.0 / (1.0 + dx * dx + dy * dy)
                    }
                })
                .collect()
        })
        .collect();
    let z: f64 = num.iter().map(|r| r.iter().sum::<f64>()).sum();
    let (grads, cross): (Vec<[f64; 2]>, Vec<f64>) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut g = [0.0; 2];
            let mut cross = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let q = (num[i][j] / z).max(1e-12);
                let coeff = (exaggeration * p[i][j] - q) * num[i][j];
                g[0] += 4.0 * coeff * (y[i][0] - y[j][0]);
                g[1] += 4.0 * coeff * (y[i][1] - y[j][1]);
                cross += p[i][j] * q.ln();
            }
            (g, cross)
        })
        .unzip();
    (cross.iter().sum(), grads)
}

/// Exact O(n²) t-SNE with early exaggeration, momentum and per-coordinate gains.
pub fn tsne(points: &[Vec<f64>], config: &TsneConfig) -> Result<Embedding2D, AnalysisError> {
    check_rows(points)?;
    let n = points.len();
    if config.perplexity <= 0.0 || (n as f64) < 2.0 * config.perplexity + 1.0 {
        return Err(AnalysisError::PerplexityTooLarge { perplexity: config.perplexity, n });
    }
    let p = joint_probabilities(points, config.perplexity);
    let p_log_p: f64 = p
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v * v.ln()).sum::<f64>())
        .sum();

    let mut rng = rng_from(config.seed);
    let init = Normal::new(0.0, 1e-2).expect("valid normal");
    let mut y: Vec<[f64; 2]> = (0..n).map(|_| [init.sample(&mut rng), init.sample(&mut rng)]).collect();
    let mut update = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut kl_history = Vec::with_capacity(config.iterations);
    let learning_rate = config.learning_rate.unwrap_or_else(|| (n as f64 / config.early_exaggeration.max(1.0) / 4.0).max(50.0));

    for iter in 0..config.iterations {
        let exaggeration = if iter < config.exaggeration_iters { config.early_exaggeration } else { 1.0 };
        if iter > 0 && iter == config.exaggeration_iters {
            // the optimizer restarts from rest once exaggeration ends
            update.iter_mut().for_each(|u| *u = [0.0; 2]);
            gains.iter_mut().for_each(|g| *g = [1.0; 2]);
        }
        let momentum = if iter < config.momentum_switch_iter { config.initial_momentum } else { config.final_momentum };
        let (cross, grads) = kl_gradient(&p, &y, exaggeration);
        for i in 0..n {
            for d in 0..2 {
                let g = grads[i][d];
                gains[i][d] = if g * update[i][d] < 0.0 { gains[i][d] + 0.2 } else { (gains[i][d] * 0.8).max(0.01) };
                update[i][d] = momentum * update[i][d] - learning_rate * gains[i][d] * g;
                y[i][d] += update[i][d];
            }
        }
        let mean = [y.iter().map(|p| p[0]).sum::<f64>() / n as f64, y.iter().map(|p| p[1]).sum::<f64>() / n as f64];
        for p in y.iter_mut() {
            p[0] -= mean[0];
            p[1] -= mean[1];
        }
        kl_history.push(p_log_p - cross);
    }
    if y.iter().flatten().any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    Ok(Embedding2D { points: y, labels: Vec::new(), kl_history })
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and column eigenvectors `v[row][k]`.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = a.len();
    let mut v: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..d).flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-22 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..d).map(|i| a[i][i]).collect(), v)
}

/// Projection onto the two leading principal components. Each axis is
/// oriented so that its largest-magnitude loading is positive.
pub fn pca_2d(points: &[Vec<f64>]) -> Result<Embedding2D, AnalysisError> {
    let d = check_rows(points)?;
    let n = points.len();
    if n == 0 {
        return Err(AnalysisError::Empty);
    }
    let mean: Vec<f64> = (0..d).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / n as f64).collect();
    let centered: Vec<Vec<f64>> = points.iter().map(|p| p.iter().zip(&mean).map(|(x, m)| x - m).collect()).collect();
    let cov: Vec<Vec<f64>> = (0..d)
        .map(|a| (0..d).map(|b| centered.iter().map(|r| r[a] * r[b]).sum::<f64>() / n as f64).collect())
        .collect();
    let (values, vectors) = jacobi_eigen(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let axes: Vec<Vec<f64>> = order
        .iter()
        .take(2)
        .map(|&k| {
            let mut axis: Vec<f64> = vectors.iter().map(|row| row[k]).collect();
            let lead = axis.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            if lead < 0.0 {
                axis.iter_mut().for_each(|v| *v = -*v);
            }
            axis
        })
        .collect();
    let project = |r: &[f64], k: usize| axes.get(k).map_or(0.0, |a| r.iter().zip(a).map(|(x, w)| x * w).sum());
    let pts = centered.iter().map(|r| [project(r, 0), project(r, 1)]).collect();
    Ok(Embedding2D { points: pts, labels: Vec::new(), kl_history: Vec::new() })
}
