//! CART regression trees grown by weighted variance reduction.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MlError;
use crate::rng::rng_from;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// Fraction of features tried at each node; `⌈max_features · p⌉` of them, at least one.
    pub max_features: f64,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_features: 1.0, min_samples_leaf: 1, max_depth: None }
    }
}

impl TreeParams {
    pub fn n_candidate_features(&self, p: usize) -> usize {
        ((self.max_features * p as f64).ceil() as usize).clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        value: f64,
        count: usize,
    },
    Split {
        /// Column index into the model's input layout.
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    /// Rows with `x[feature] <= threshold` go left.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> Vec<(f64, usize)> {
        match self {
            TreeNode::Leaf { value, count } => vec![(*value, *count)],
            TreeNode::Split { left, right, .. } => {
                let mut v = left.leaves();
                v.extend(right.leaves());
                v
            }
        }
    }

    /// The root split as `(feature, threshold)`, if any.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split { feature, threshold, .. } => Some((*feature, *threshold)),
        }
    }
}

/// Midpoint of two consecutive distinct sorted values. When the midpoint
/// rounds up to `b`, `a` is used so that `a` still goes left and `b` right.
pub fn split_threshold(a: f64, b: f64) -> f64 {
    let mid = a + (b - a) / 2.0;
    if mid >= b {
        a
    } else {
        mid
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    /// `S_l² / n_l + S_r² / n_r`; larger is a bigger variance reduction.
    score: f64,
}

fn better(score: f64, best: f64) -> bool {
    // relative slack so that rounding noise cannot override the tie order
    score > best + 1e-12 * best.abs()
}

/// Row indices of each column sorted by value, ties by row index.
pub(crate) fn presort(x: &[&[f64]]) -> Vec<Vec<u32>> {
    x.iter()
        .map(|col| {
            let mut idx: Vec<u32> = (0..col.len() as u32).collect();
            idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
            idx
        })
        .collect()
}

/// Grows one tree over a weighted sample. Every node owns the same
/// contiguous segment of each feature's sorted row list, so a split is a
/// stable partition of every list instead of a fresh sort.
pub(crate) struct Grower<'a> {
    x: &'a [&'a [f64]],
    y: &'a [f64],
    params: &'a TreeParams,
    n_try: usize,
    weight: Vec<u32>,
    /// `p` blocks of `m` rows, one block per feature.
    order: Vec<u32>,
    m: usize,
    go_left: Vec<bool>,
    tmp: Vec<u32>,
}

impl<'a> Grower<'a> {
    /// `weight[i]` is how often row `i` occurs in the sample.
    pub(crate) fn new(x: &'a [&'a [f64]], y: &'a [f64], params: &'a TreeParams, sorted: &[Vec<u32>], weight: Vec<u32>) -> Self {
        let n_try = params.n_candidate_features(x.len());
        let m = weight.iter().filter(|&&w| w > 0).count();
        let mut order = Vec::with_capacity(m * x.len());
        for s in sorted {
            order.extend(s.iter().copied().filter(|&r| weight[r as usize] > 0));
        }
        Grower { x, y, params, n_try, weight, order, m, go_left: vec![false; y.len()], tmp: Vec::with_capacity(m) }
    }

    pub(crate) fn root<R: Rng>(&mut self, rng: &mut R) -> TreeNode {
        self.grow(0, self.m, 0, rng)
    }

    fn segment(&self, f: usize, start: usize, end: usize) -> &[u32] {
        &self.order[f * self.m + start..f * self.m + end]
    }

    fn best_split<R: Rng>(&self, start: usize, end: usize, n: usize, total: f64, rng: &mut R) -> Option<Candidate> {
        let min_leaf = self.params.min_samples_leaf.max(1);
        let p = self.x.len();
        let mut features: Vec<usize> = if self.n_try >= p { (0..p).collect() } else { sample(rng, p, self.n_try).into_vec() };
        features.sort_unstable();
        let parent = total * total / n as f64;
        let mut best: Option<Candidate> = None;
        for &f in &features {
            let col = self.x[f];
            let seg = self.segment(f, start, end);
            if col[seg[0] as usize] == col[seg[seg.len() - 1] as usize] {
                continue;
            }
            let (mut left, mut nl) = (0.0, 0usize);
            for k in 0..seg.len() - 1 {
                let r = seg[k] as usize;
                let w = self.weight[r];
                left += f64::from(w) * self.y[r];
                nl += w as usize;
                let (a, b) = (col[r], col[seg[k + 1] as usize]);
                if a == b || nl < min_leaf || n - nl < min_leaf {
                    continue;
                }
                let right = total - left;
                let score = left * left / nl as f64 + right * right / (n - nl) as f64;
                if best.is_none_or(|c| better(score, c.score)) {
                    best = Some(Candidate { feature: f, threshold: split_threshold(a, b), score });
                }
            }
        }
        best.filter(|c| better(c.score, parent))
    }

    fn grow<R: Rng>(&mut self, start: usize, end: usize, depth: usize, rng: &mut R) -> TreeNode {
        let rows = &self.order[start..end];
        let (mut n, mut total) = (0usize, 0.0);
        for &r in rows {
            let w = self.weight[r as usize];
            n += w as usize;
            total += f64::from(w) * self.y[r as usize];
        }
        let first = self.y[rows[0] as usize];
        let constant = rows.iter().all(|&r| self.y[r as usize] == first);
        let value = if constant { first } else { total / n as f64 };
        let leaf = TreeNode::Leaf { value, count: n };
        if constant || n < 2 * self.params.min_samples_leaf.max(1) || self.params.max_depth.is_some_and(|d| depth >= d) {
            return leaf;
        }
        let Some(split) = self.best_split(start, end, n, total, rng) else {
            return leaf;
        };
        let col = self.x[split.feature];
        let mut w_left = 0;
        for &r in &self.order[start..end] {
            let left = col[r as usize] <= split.threshold;
            self.go_left[r as usize] = left;
            if left {
                w_left += self.weight[r as usize] as usize;
            }
        }
        // children that must become leaves only need the row set, which block 0 holds
        let can_split = |count: usize| count >= 2 * self.params.min_samples_leaf.max(1);
        let deeper = self.params.max_depth.is_none_or(|d| depth + 1 < d);
        let blocks = if deeper && (can_split(w_left) || can_split(n - w_left)) { self.x.len() } else { 1 };
        let mut n_left = 0;
        for f in 0..blocks {
            let base = f * self.m;
            self.tmp.clear();
            let mut w = base + start;
            for k in base + start..base + end {
                let r = self.order[k];
                if self.go_left[r as usize] {
                    self.order[w] = r;
                    w += 1;
                } else {
                    self.tmp.push(r);
                }
            }
            n_left = w - base - start;
            self.order[w..base + end].copy_from_slice(&self.tmp);
        }
        let mid = start + n_left;
        let left = Box::new(self.grow(start, mid, depth + 1, rng));
        let right = Box::new(self.grow(mid, end, depth + 1, rng));
        TreeNode::Split { feature: split.feature, threshold: split.threshold, left, right }
    }
}

pub(crate) fn check_inputs(x: &[&[f64]], y: &[f64]) -> Result<(), MlError> {
    if y.is_empty() {
        return Err(MlError::Empty);
    }
    if let Some(bad) = x.iter().find(|c| c.len() != y.len()) {
        return Err(MlError::LengthMismatch(bad.len(), y.len()));
    }
    if x.iter().any(|c| c.iter().any(|v| !v.is_finite())) || y.iter().any(|v| !v.is_finite()) {
        return Err(MlError::NonFinite);
    }
    Ok(())
}

/// Grows one tree on every row of the column-major `x`.
pub fn fit_tree(x: &[&[f64]], y: &[f64], params: &TreeParams, seed: u64) -> Result<TreeNode, MlError> {
    check_inputs(x, y)?;
    let mut rng = rng_from(seed);
    let sorted = presort(x);
    Ok(Grower::new(x, y, params, &sorted, vec![1; y.len()]).root(&mut rng))
}
