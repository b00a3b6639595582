use std::cmp::Ordering;

use crate::analysis::pearson_r;

/// `|ρ|` of each column against `target`; zero-variance columns score 0.
pub fn abs_correlation_scores<C: AsRef<[f64]>>(columns: &[C], target: &[f64]) -> Vec<f64> {
    columns.iter().map(|c| pearson_r(c.as_ref(), target).map_or(0.0, f64::abs)).collect()
}

/// Indices of the `k` columns with the largest `|ρ|` against `target`, best
/// first. Equal scores are ordered by column name. A constant target scores
/// every column 0, so the selection is the `k` lexicographically first names.
pub fn select_top_k<C: AsRef<[f64]>, S: AsRef<str>>(names: &[S], columns: &[C], target: &[f64], k: usize) -> Vec<usize> {
    assert_eq!(names.len(), columns.len(), "one name per column");
    let scores = abs_correlation_scores(columns, target);
    let cmp = |a: &usize, b: &usize| -> Ordering {
        scores[*b].total_cmp(&scores[*a]).then_with(|| names[*a].as_ref().cmp(names[*b].as_ref())).then(a.cmp(b))
    };
    let mut idx: Vec<usize> = (0..columns.len()).collect();
    if k < idx.len() && k > 0 {
        idx.select_nth_unstable_by(k - 1, cmp);
        idx.truncate(k);
    }
    idx.truncate(k);
    idx.sort_by(cmp);
    idx
}
