use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::chain::{fit_holistic, ChainInputs, ChainParams};
use super::forest::{fit_forest, ForestParams};
use super::split::{complement, k_fold, train_test_split};
use super::{rmse, MlError};
use crate::rng::{derive_seed, rng_from};

pub const DEFAULT_TREE_GRID: [usize; 4] = [10, 50, 100, 200];
pub const DEFAULT_FRACTIONS: [f64; 4] = [0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub mean_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub cells: Vec<GridCell>,
    pub best: ForestParams,
}

fn depth_key(d: Option<usize>) -> usize {
    d.unwrap_or(usize::MAX)
}

fn rows(col: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| col[i]).collect()
}

/// Exhaustive k-fold search over `n_trees × max_depth` with the other
/// parameters taken from `base`. Ties go to fewer trees, then shallower depth.
pub fn grid_search(
    x: &[&[f64]],
    y: &[f64],
    n_trees: &[usize],
    max_depth: &[Option<usize>],
    base: &ForestParams,
    k: usize,
    seed: u64,
) -> Result<GridReport, MlError> {
    if n_trees.is_empty() || max_depth.is_empty() {
        return Err(MlError::InvalidParams("empty parameter grid".into()));
    }
    let folds = k_fold(y.len(), k, seed)?;
    let split: Vec<(Vec<usize>, Vec<usize>)> = folds.iter().map(|f| (complement(y.len(), f), f.clone())).collect();
    let mut cells = Vec::new();
    for &nt in n_trees {
        for &d in max_depth {
            let params = ForestParams { n_trees: nt, max_depth: d, ..base.clone() };
            let mut total = 0.0;
            for (fi, (train, test)) in split.iter().enumerate() {
                let xtr: Vec<Vec<f64>> = x.iter().map(|c| rows(c, train)).collect();
                let xte: Vec<Vec<f64>> = x.iter().map(|c| rows(c, test)).collect();
                let xtr_refs: Vec<&[f64]> = xtr.iter().map(Vec::as_slice).collect();
                let xte_refs: Vec<&[f64]> = xte.iter().map(Vec::as_slice).collect();
                let forest = fit_forest(&xtr_refs, &rows(y, train), &params, derive_seed(seed, fi as u64))?;
                total += rmse(&rows(y, test), &forest.predict_columns(&xte_refs)?)?;
            }
            cells.push(GridCell { n_trees: nt, max_depth: d, mean_rmse: total / split.len() as f64 });
        }
    }
    let best = cells
        .iter()
        .min_by(|a, b| {
            a.mean_rmse
                .total_cmp(&b.mean_rmse)
                .then(a.n_trees.cmp(&b.n_trees))
                .then(depth_key(a.max_depth).cmp(&depth_key(b.max_depth)))
        })
        .expect("grid is non-empty");
    let best = ForestParams { n_trees: best.n_trees, max_depth: best.max_depth, ..base.clone() };
    Ok(GridReport { cells, best })
}

/// A fixed holdout and nested training subsets, one per fraction, each a
/// prefix of one seeded permutation of the remaining indices.
pub fn learning_curve_splits(
    n: usize,
    fractions: &[f64],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<Vec<usize>>), MlError> {
    if fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
        return Err(MlError::InvalidParams("fractions must lie in (0, 1]".into()));
    }
    let (mut train, test) = train_test_split(n, test_fraction, seed)?;
    train.shuffle(&mut rng_from(derive_seed(seed, 0x5B)));
    let subsets = fractions
        .iter()
        .map(|f| {
            let m = ((train.len() as f64 * f).round() as usize).clamp(1, train.len());
            let mut s = train[..m].to_vec();
            s.sort_unstable();
            s
        })
        .collect();
    Ok((test, subsets))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurvePoint {
    pub fraction: f64,
    pub n_train: usize,
    /// RMSE averaged over the seven traits on the holdout.
    pub rmse: f64,
}

fn subset<'a>(inputs: &ChainInputs, idx: &[usize]) -> (Vec<Vec<Vec<f64>>>, Vec<Vec<String>>) {
    let cols = inputs.columns.iter().map(|route| route.iter().map(|c| rows(c, idx)).collect()).collect();
    (cols, inputs.names.clone())
}

fn view(cols: &[Vec<Vec<f64>>], names: Vec<Vec<String>>) -> Result<ChainInputs<'_>, MlError> {
    ChainInputs::new(cols.iter().map(|r| r.iter().map(Vec::as_slice).collect()).collect(), names)
}

/// Trains the chain ensemble on nested subsamples of the non-holdout rows
/// and scores each on the same holdout.
pub fn learning_curve(
    inputs: &ChainInputs,
    targets: &[&[f64]],
    fractions: &[f64],
    n_chains: usize,
    params: &ChainParams,
    test_fraction: f64,
    seed: u64,
) -> Result<Vec<LearningCurvePoint>, MlError> {
    let (test, subsets) = learning_curve_splits(inputs.n_rows(), fractions, test_fraction, seed)?;
    let (te_cols, te_names) = subset(inputs, &test);
    let te_view = view(&te_cols, te_names)?;
    let te_y: Vec<Vec<f64>> = targets.iter().map(|t| rows(t, &test)).collect();
    fractions
        .iter()
        .zip(subsets)
        .map(|(&fraction, train)| {
            let (tr_cols, tr_names) = subset(inputs, &train);
            let tr_view = view(&tr_cols, tr_names)?;
            let tr_y: Vec<Vec<f64>> = targets.iter().map(|t| rows(t, &train)).collect();
            let tr_refs: Vec<&[f64]> = tr_y.iter().map(Vec::as_slice).collect();
            let model = fit_holistic(&tr_view, &tr_refs, n_chains, params, seed)?;
            let pred = model.predict(&te_view)?;
            let mut total = 0.0;
            for (y, p) in te_y.iter().zip(&pred) {
                total += rmse(y, p)?;
            }
            Ok(LearningCurvePoint { fraction, n_train: train.len(), rmse: total / 7.0 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn signal(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = rng_from(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let y = x.iter().map(|v| (0.8 * v + 0.1 * rng.random::<f64>()).min(1.0)).collect();
        (x, y)
    }

    #[test]
    fn single_cell_wins() {
        let (x, y) = signal(40, 1);
        let r = grid_search(&[&x], &y, &[5], &[None], &ForestParams::default(), 3, 0).unwrap();
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.best.n_trees, 5);
    }

    #[test]
    fn ties_prefer_fewer_trees_then_shallower() {
        // constant target: every cell scores exactly zero
        let (x, _) = signal(30, 2);
        let y = vec![0.5; 30];
        let r = grid_search(&[&x], &y, &[20, 10], &[None, Some(3)], &ForestParams::default(), 3, 0).unwrap();
        assert_eq!(r.cells.len(), 4);
        assert_eq!((r.best.n_trees, r.best.max_depth), (10, Some(3)));
    }

    #[test]
    fn nested_subsets_with_fixed_holdout() {
        let (test, subsets) = learning_curve_splits(100, &DEFAULT_FRACTIONS, 0.2, 7).unwrap();
        assert_eq!(test.len(), 20);
        let sizes: Vec<usize> = subsets.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![32, 48, 64, 80]);
        for w in subsets.windows(2) {
            assert!(w[0].iter().all(|i| w[1].contains(i)));
        }
        assert!(subsets[3].iter().all(|i| !test.contains(i)));
        assert!(learning_curve_splits(10, &[0.0], 0.2, 0).is_err());
    }

    #[test]
    fn one_point_per_fraction() {
        let (x, y) = signal(60, 3);
        let inputs = ChainInputs::shared(vec![&x], vec!["x".into()]).unwrap();
        let targets: Vec<&[f64]> = vec![&y; 7];
        let params = ChainParams { forest: ForestParams { n_trees: 3, ..ForestParams::default() }, ..ChainParams::default() };
        let pts = learning_curve(&inputs, &targets, &[0.5, 1.0], 2, &params, 0.25, 1).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].n_train, 45);
        assert!(pts.iter().all(|p| p.rmse.is_finite()));
    }
}
