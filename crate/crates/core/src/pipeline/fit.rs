use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{FeatureConfig, PipelineError, PreparedUser, Route};
use crate::corpus::PsychTrait;
use crate::features::{
    fit_ngrams, fit_pos_ngrams, fit_tfidf, scale_value, select_top_k, ColumnName, Family, FeatureMatrix,
    SequenceModel, TfidfModel, BEHAVIORAL_NAMES,
};
use crate::emotion::Emotion;
use crate::ml::ChainInputs;

const SELECT_CHUNK: usize = 2048;

/// A fitted column: its index within the family and its training bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeptColumn {
    pub index: u32,
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// Vocabularies, bounds and per-trait selections fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub config: FeatureConfig,
    tfidf: TfidfModel,
    ngram: SequenceModel,
    pos: SequenceModel,
    /// Kept columns per family, in [`Family::ALL`] order, sorted by index.
    kept: Vec<Vec<KeptColumn>>,
    /// Per trait, in canonical order: `(family slot, position in kept)`.
    layout: Vec<Vec<(usize, usize)>>,
}

/// Scaled kept columns over a set of users: `[family][kept column][row]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlock {
    pub columns: Vec<Vec<Vec<f64>>>,
    pub n_rows: usize,
}

fn slot(f: Family) -> usize {
    Family::ALL.iter().position(|&g| g == f).expect("known family")
}

fn families(route: Route) -> &'static [Family] {
    match route {
        Route::Behavioral => &[Family::Behavioral],
        Route::Tfidf => &[Family::Tfidf],
        Route::Ngram => &[Family::Ngram],
        Route::Pos => &[Family::Pos],
        Route::Emotion => &[Family::Emotion],
        Route::All => &Family::ALL,
    }
}

/// Families whose columns are narrowed by top-k selection.
fn selected(f: Family) -> bool {
    matches!(f, Family::Tfidf | Family::Ngram | Family::Pos)
}

fn family_names(f: Family, tfidf: &TfidfModel, ngram: &SequenceModel, pos: &SequenceModel) -> Vec<String> {
    match f {
        Family::Behavioral => BEHAVIORAL_NAMES.iter().map(|s| s.to_string()).collect(),
        Family::Tfidf => tfidf.vocabulary().terms().to_vec(),
        Family::Ngram => ngram.column_names(),
        Family::Pos => pos.column_names(),
        Family::Emotion => Emotion::ALL.iter().map(|e| e.name().to_string()).collect(),
    }
}

fn dense_sparse(values: &[f64]) -> Vec<(u32, f64)> {
    values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, &v)| (i as u32, v)).collect()
}

/// Sparse raw row of one family for one user.
fn raw_row(f: Family, u: &PreparedUser, tfidf: &TfidfModel, ngram: &SequenceModel, pos: &SequenceModel) -> Vec<(u32, f64)> {
    match f {
        Family::Behavioral => dense_sparse(&u.behavioral),
        Family::Tfidf => tfidf.transform_sparse(&u.document()),
        Family::Ngram => ngram.transform_sparse(&u.words),
        Family::Pos => pos.transform_sparse(&u.tags),
        Family::Emotion => dense_sparse(&u.emotion),
    }
}

fn lookup(row: &[(u32, f64)], index: u32) -> f64 {
    row.binary_search_by_key(&index, |e| e.0).map_or(0.0, |i| row[i].1)
}

/// Column-major view of sparse rows: per column, `(row, value)` entries.
fn by_column(rows: &[Vec<(u32, f64)>], n_cols: usize) -> Vec<Vec<(u32, f64)>> {
    let mut cols = vec![Vec::new(); n_cols];
    for (r, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            cols[j as usize].push((r as u32, v));
        }
    }
    cols
}

fn bounds(col: &[(u32, f64)], n_rows: usize) -> (f64, f64) {
    let implicit_zero = col.len() < n_rows;
    let init = if implicit_zero { (0.0, 0.0) } else { (f64::INFINITY, f64::NEG_INFINITY) };
    col.iter().fold(init, |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)))
}

fn scaled_dense(col: &[(u32, f64)], n_rows: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    let mut out = vec![scale_value(lo, hi, 0.0); n_rows];
    for &(r, v) in col {
        out[r as usize] = scale_value(lo, hi, v);
    }
    out
}

/// Exact top-k over many columns, one chunk at a time: every global winner wins
/// its own chunk, and the ranking key depends only on the column.
fn chunked_top_k(
    names: &[String],
    cols: &[Vec<(u32, f64)>],
    col_bounds: &[(f64, f64)],
    n_rows: usize,
    target: &[f64],
    k: usize,
) -> Vec<usize> {
    let materialize = |idx: &[usize]| -> Vec<Vec<f64>> {
        idx.iter().map(|&j| scaled_dense(&cols[j], n_rows, col_bounds[j])).collect()
    };
    let all: Vec<usize> = (0..cols.len()).collect();
    let mut candidates = Vec::new();
    for chunk in all.chunks(SELECT_CHUNK) {
        let dense = materialize(chunk);
        let chunk_names: Vec<&str> = chunk.iter().map(|&j| names[j].as_str()).collect();
        candidates.extend(select_top_k(&chunk_names, &dense, target, k).into_iter().map(|i| chunk[i]));
    }
    if cols.len() <= SELECT_CHUNK {
        return candidates;
    }
    let dense = materialize(&candidates);
    let cand_names: Vec<&str> = candidates.iter().map(|&j| names[j].as_str()).collect();
    select_top_k(&cand_names, &dense, target, k).into_iter().map(|i| candidates[i]).collect()
}

impl FeaturePipeline {
    /// Fits vocabularies and bounds on `train` and selects, per trait and
    /// text family, the `top_k` columns most correlated with that trait.
    pub fn fit(users: &[&PreparedUser], targets: &[Vec<f64>], config: &FeatureConfig) -> Result<Self, PipelineError> {
        if users.is_empty() {
            return Err(PipelineError::TooFewUsers { needed: 1, got: 0 });
        }
        let docs: Vec<Vec<&str>> = users.iter().map(|u| u.document()).collect();
        let words: Vec<Vec<Vec<String>>> = users.iter().map(|u| u.words.clone()).collect();
        let tags: Vec<Vec<Vec<String>>> = users.iter().map(|u| u.tags.clone()).collect();
        let tfidf = fit_tfidf(&docs, config.min_df)?;
        let ngram = fit_ngrams(&words, config.min_df)?;
        let pos = fit_pos_ngrams(&tags, config.min_df)?;
        let n = users.len();

        let mut kept = Vec::with_capacity(5);
        let mut ranked: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); 5]; 7];
        for f in Family::ALL {
            let needed: Vec<PsychTrait> =
                PsychTrait::ALL.into_iter().filter(|&t| families(config.routes.get(t)).contains(&f)).collect();
            if needed.is_empty() {
                kept.push(Vec::new());
                continue;
            }
            let names = family_names(f, &tfidf, &ngram, &pos);
            let rows: Vec<Vec<(u32, f64)>> = users.iter().map(|u| raw_row(f, u, &tfidf, &ngram, &pos)).collect();
            let cols = by_column(&rows, names.len());
            let col_bounds: Vec<(f64, f64)> = cols.iter().map(|c| bounds(c, n)).collect();
            let mut union = BTreeSet::new();
            for &t in &needed {
                let order: Vec<usize> = if selected(f) {
                    chunked_top_k(&names, &cols, &col_bounds, n, &targets[t.index()], config.top_k)
                } else {
                    (0..names.len()).collect()
                };
                union.extend(order.iter().copied());
                ranked[t.index()][slot(f)] = order;
            }
            kept.push(
                union
                    .into_iter()
                    .map(|j| KeptColumn { index: j as u32, name: names[j].clone(), min: col_bounds[j].0, max: col_bounds[j].1 })
                    .collect(),
            );
        }
        let layout = ranked
            .iter()
            .map(|per_family| {
                let mut out = Vec::new();
                for (s, order) in per_family.iter().enumerate() {
                    for &j in order {
                        let p = kept[s].binary_search_by_key(&(j as u32), |c: &KeptColumn| c.index).expect("kept");
                        out.push((s, p));
                    }
                }
                out
            })
            .collect();
        Ok(FeaturePipeline { config: config.clone(), tfidf, ngram, pos, kept, layout })
    }

    /// Scaled kept columns for `users`, using only the fitted state.
    pub fn transform(&self, users: &[&PreparedUser]) -> FeatureBlock {
        let columns = Family::ALL
            .iter()
            .zip(&self.kept)
            .map(|(&f, kept)| {
                if kept.is_empty() {
                    return Vec::new();
                }
                let rows: Vec<Vec<(u32, f64)>> =
                    users.iter().map(|u| raw_row(f, u, &self.tfidf, &self.ngram, &self.pos)).collect();
                kept.iter()
                    .map(|c| rows.iter().map(|r| scale_value(c.min, c.max, lookup(r, c.index))).collect())
                    .collect()
            })
            .collect();
        FeatureBlock { columns, n_rows: users.len() }
    }

    /// Routed column names per trait, canonical order.
    pub fn column_names(&self) -> Vec<Vec<String>> {
        self.layout
            .iter()
            .map(|cols| {
                cols.iter().map(|&(s, p)| ColumnName::new(Family::ALL[s], self.kept[s][p].name.clone()).to_string()).collect()
            })
            .collect()
    }

    pub fn inputs<'a>(&self, block: &'a FeatureBlock) -> Result<ChainInputs<'a>, PipelineError> {
        let columns = self
            .layout
            .iter()
            .map(|cols| cols.iter().map(|&(s, p)| block.columns[s][p].as_slice()).collect())
            .collect();
        Ok(ChainInputs::new(columns, self.column_names())?)
    }

    /// Every kept column as a matrix, sorted by family then name.
    pub fn to_matrix(&self, block: &FeatureBlock, users: &[&PreparedUser]) -> Result<FeatureMatrix, PipelineError> {
        let mut m = FeatureMatrix::new(users.iter().map(|u| u.handle.clone()).collect());
        for ((&f, kept), cols) in Family::ALL.iter().zip(&self.kept).zip(&block.columns) {
            for (c, values) in kept.iter().zip(cols) {
                m.push_column(ColumnName::new(f, c.name.clone()), values.clone())?;
            }
        }
        m.sort_columns();
        Ok(m)
    }

    pub fn kept(&self, f: Family) -> &[KeptColumn] {
        &self.kept[slot(f)]
    }
}
