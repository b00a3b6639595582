use rand::seq::SliceRandom;

use super::MlError;
use crate::rng::rng_from;

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from(seed));
    idx
}

/// Seeded random split. The test side gets `round(n · test_fraction)`
/// indices; both sides are returned sorted.
pub fn train_test_split(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), MlError> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(MlError::InvalidParams(format!("test fraction {test_fraction} outside [0, 1)")));
    }
    let n_test = (n as f64 * test_fraction).round() as usize;
    let idx = shuffled(n, seed);
    let mut test = idx[..n_test].to_vec();
    let mut train = idx[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// `k` disjoint folds covering `0..n`, sizes differing by at most one.
/// Each fold is sorted.
pub fn k_fold(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, MlError> {
    if k < 2 || k > n {
        return Err(MlError::InvalidParams(format!("k = {k} folds for {n} samples")));
    }
    let idx = shuffled(n, seed);
    let mut folds: Vec<Vec<usize>> = (0..k).map(|f| idx.iter().copied().skip(f).step_by(k).collect()).collect();
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Indices of `0..n` not in the sorted `fold`.
pub(crate) fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| fold.binary_search(i).is_err()).collect()
}
