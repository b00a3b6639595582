use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{check_inputs, presort, Grower, TreeNode, TreeParams};
use super::MlError;
use crate::rng::{derive_seed, rng_from};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: f64,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, max_features: 1.0 / 3.0, min_samples_leaf: 5, max_depth: None, bootstrap: true }
    }
}

impl ForestParams {
    pub fn tree_params(&self) -> TreeParams {
        TreeParams { max_features: self.max_features, min_samples_leaf: self.min_samples_leaf, max_depth: self.max_depth }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub seed: u64,
    pub n_features: usize,
    pub trees: Vec<TreeNode>,
}

/// Fits `n_trees` trees, each on a bootstrap resample when enabled. Tree `i`
/// uses seed `derive_seed(seed, i)`, so the result does not depend on how
/// many threads grow the trees.
pub fn fit_forest(x: &[&[f64]], y: &[f64], params: &ForestParams, seed: u64) -> Result<ForestModel, MlError> {
    check_inputs(x, y)?;
    if params.n_trees == 0 {
        return Err(MlError::InvalidParams("n_trees must be at least 1".into()));
    }
    let n = y.len();
    let tree_params = params.tree_params();
    let sorted = presort(x);
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from(derive_seed(seed, i as u64));
            let weight = if params.bootstrap {
                let mut w = vec![0u32; n];
                for _ in 0..n {
                    w[rng.random_range(0..n)] += 1;
                }
                w
            } else {
                vec![1; n]
            };
            Grower::new(x, y, &tree_params, &sorted, weight).root(&mut rng)
        })
        .collect();
    Ok(ForestModel { params: params.clone(), seed, n_features: x.len(), trees })
}

impl ForestModel {
    /// Mean of the tree predictions, without clamping.
    pub fn raw_predict(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    /// Mean of the tree predictions, clamped to `[0, 1]`.
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.raw_predict(row).clamp(0.0, 1.0)
    }

    /// Predictions for every row of column-major `x`.
    pub fn predict_columns(&self, x: &[&[f64]]) -> Result<Vec<f64>, MlError> {
        if x.len() != self.n_features {
            return Err(MlError::LayoutMismatch { expected: self.n_features, got: x.len() });
        }
        let n = x.first().map_or(0, |c| c.len());
        Ok((0..n)
            .map(|i| {
                let row: Vec<f64> = x.iter().map(|c| c[i]).collect();
                self.predict(&row)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = rng_from(seed);
        let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
        let y = (0..n).map(|i| (0.6 * cols[0][i] + 0.3 * cols[1][i] * cols[1][i]).clamp(0.0, 1.0)).collect();
        (cols, y)
    }

    fn refs(cols: &[Vec<f64>]) -> Vec<&[f64]> {
        cols.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn single_unbagged_tree_overfits() {
        let (cols, y) = data(40, 1);
        let params = ForestParams { n_trees: 1, bootstrap: false, min_samples_leaf: 1, max_features: 1.0, max_depth: None };
        let f = fit_forest(&refs(&cols), &y, &params, 3).unwrap();
        assert_eq!(f.predict_columns(&refs(&cols)).unwrap(), y);
    }

    #[test]
    fn constant_target() {
        let (cols, _) = data(30, 2);
        let f = fit_forest(&refs(&cols), &[0.42; 30], &ForestParams { n_trees: 5, ..ForestParams::default() }, 1).unwrap();
        assert!(f.predict_columns(&refs(&cols)).unwrap().iter().all(|&p| (p - 0.42).abs() < 1e-15));
    }

    #[test]
    fn prediction_is_mean_of_trees() {
        let (cols, y) = data(50, 3);
        let f = fit_forest(&refs(&cols), &y, &ForestParams { n_trees: 7, ..ForestParams::default() }, 9).unwrap();
        let row = [0.3, 0.7, 0.1];
        let manual = f.trees.iter().map(|t| t.predict(&row)).sum::<f64>() / 7.0;
        assert_eq!(f.raw_predict(&row), manual);
    }

    #[test]
    fn deterministic_across_thread_pools() {
        let (cols, y) = data(60, 4);
        let params = ForestParams { n_trees: 12, ..ForestParams::default() };
        let a = fit_forest(&refs(&cols), &y, &params, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| fit_forest(&refs(&cols), &y, &params, 5).unwrap());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn zero_trees_rejected() {
        let (cols, y) = data(5, 5);
        assert!(fit_forest(&refs(&cols), &y, &ForestParams { n_trees: 0, ..ForestParams::default() }, 0).is_err());
    }
}
