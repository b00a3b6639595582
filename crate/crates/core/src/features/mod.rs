//! Behavioral and language features, min-max scaling and top-k selection.

mod behavioral;
mod select;
mod text;

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use behavioral::{behavioral_vector, is_uppercase_word, BEHAVIORAL_NAMES};
pub use select::{abs_correlation_scores, select_top_k};
pub use text::{
    fit_ngrams, fit_pos_ngrams, fit_tfidf, ngrams, smoothed_idf, tag_sequences, SequenceModel, TfidfModel, VocabKind,
    Vocabulary,
};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("cannot fit a vocabulary on an empty corpus")]
    EmptyCorpus,
    #[error("min_df must be at least 1")]
    InvalidMinDf,
    #[error("duplicate feature column `{0}`")]
    DuplicateColumn(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("bad feature matrix file: {0}")]
    Format(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Feature family. Declaration order is the column order of a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Behavioral,
    Tfidf,
    Ngram,
    Pos,
    Emotion,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Behavioral, Family::Tfidf, Family::Ngram, Family::Pos, Family::Emotion];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Behavioral => "behavioral",
            Family::Tfidf => "tfidf",
            Family::Ngram => "ngram",
            Family::Pos => "pos",
            Family::Emotion => "emotion",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| FeatureError::Format(format!("unknown feature family `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColumnName {
    pub family: Family,
    pub name: String,
}

impl ColumnName {
    pub fn new(family: Family, name: impl Into<String>) -> Self {
        ColumnName { family, name: name.into() }
    }
}

impl fmt::Display for ColumnName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family, self.name)
    }
}

impl FromStr for ColumnName {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (family, name) =
            s.split_once(':').ok_or_else(|| FeatureError::Format(format!("column `{s}` lacks a family prefix")))?;
        Ok(ColumnName { family: family.parse()?, name: name.to_string() })
    }
}

/// Named feature columns over a fixed list of users, stored column-major.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMatrix {
    users: Vec<String>,
    names: Vec<ColumnName>,
    columns: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn new(users: Vec<String>) -> Self {
        FeatureMatrix { users, names: Vec::new(), columns: Vec::new() }
    }

    pub fn n_rows(&self) -> usize {
        self.users.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn names(&self) -> &[ColumnName] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn position(&self, name: &ColumnName) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn push_column(&mut self, name: ColumnName, values: Vec<f64>) -> Result<(), FeatureError> {
        if values.len() != self.n_rows() {
            return Err(FeatureError::Shape(format!("column {name} has {} rows, expected {}", values.len(), self.n_rows())));
        }
        if self.names.contains(&name) {
            return Err(FeatureError::DuplicateColumn(name.to_string()));
        }
        self.names.push(name);
        self.columns.push(values);
        Ok(())
    }

    /// Appends a block given as one row per user.
    pub fn push_rows(&mut self, family: Family, names: &[String], rows: &[Vec<f64>]) -> Result<(), FeatureError> {
        if rows.len() != self.n_rows() {
            return Err(FeatureError::Shape(format!("{} rows for {} users", rows.len(), self.n_rows())));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != names.len()) {
            return Err(FeatureError::Shape(format!("row of width {} for {} names", bad.len(), names.len())));
        }
        for (j, name) in names.iter().enumerate() {
            self.push_column(ColumnName::new(family, name.clone()), rows.iter().map(|r| r[j]).collect())?;
        }
        Ok(())
    }

    /// Reorders columns by family, then name.
    pub fn sort_columns(&mut self) {
        let mut order: Vec<usize> = (0..self.n_cols()).collect();
        order.sort_by(|&a, &b| self.names[a].cmp(&self.names[b]));
        self.names = order.iter().map(|&j| self.names[j].clone()).collect();
        self.columns = order.iter().map(|&j| std::mem::take(&mut self.columns[j])).collect();
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            users: self.users.clone(),
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
            columns: cols.iter().map(|&j| self.columns[j].clone()).collect(),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            users: rows.iter().map(|&i| self.users[i].clone()).collect(),
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| rows.iter().map(|&i| c[i]).collect()).collect(),
        }
    }

    /// Column indices of one family, in matrix order.
    pub fn family_columns(&self, family: Family) -> Vec<usize> {
        (0..self.n_cols()).filter(|&j| self.names[j].family == family).collect()
    }

    /// Concatenates two matrices over the same users.
    pub fn hstack(mut self, other: FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
        if self.users != other.users {
            return Err(FeatureError::Shape("matrices cover different users".into()));
        }
        for (n, c) in other.names.into_iter().zip(other.columns) {
            self.push_column(n, c)?;
        }
        Ok(self)
    }

    /// CSV with header `user,<family>:<name>,…`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), FeatureError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["user".to_string()];
        header.extend(self.names.iter().map(ToString::to_string));
        w.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut record = vec![self.users[i].clone()];
            record.extend(self.columns.iter().map(|c| c[i].to_string()));
            w.write_record(&record)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<FeatureMatrix, FeatureError> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.get(0) != Some("user") {
            return Err(FeatureError::Format("first column must be `user`".into()));
        }
        let names: Vec<ColumnName> = header.iter().skip(1).map(str::parse).collect::<Result<_, _>>()?;
        let mut seen = HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(*n)) {
            return Err(FeatureError::DuplicateColumn(dup.to_string()));
        }
        let mut users = Vec::new();
        let mut columns = vec![Vec::new(); names.len()];
        for (line, record) in r.records().enumerate() {
            let record = record?;
            users.push(record.get(0).unwrap_or_default().to_string());
            for (j, col) in columns.iter_mut().enumerate() {
                let cell = record.get(j + 1).unwrap_or_default();
                let v: f64 = cell
                    .parse()
                    .map_err(|_| FeatureError::Format(format!("row {}: bad number `{cell}`", line + 2)))?;
                col.push(v);
            }
        }
        Ok(FeatureMatrix { users, names, columns })
    }
}

/// `(x − min) / (max − min)` clamped to `[0, 1]`; 0 when the bounds coincide.
pub fn scale_value(min: f64, max: f64, x: f64) -> f64 {
    let span = max - min;
    if span <= 0.0 || !span.is_finite() {
        0.0
    } else {
        ((x - min) / span).clamp(0.0, 1.0)
    }
}

/// Per-column min-max bounds fitted on a subset of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(matrix: &FeatureMatrix, fit_rows: &[usize]) -> Result<Self, FeatureError> {
        if fit_rows.is_empty() {
            return Err(FeatureError::Shape("min-max fit needs at least one row".into()));
        }
        let mut min = Vec::with_capacity(matrix.n_cols());
        let mut max = Vec::with_capacity(matrix.n_cols());
        for c in matrix.columns() {
            let (lo, hi) = fit_rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(c[i]), hi.max(c[i])));
            min.push(lo);
            max.push(hi);
        }
        Ok(MinMaxScaler { min, max })
    }

    /// Constant fitted columns map to 0; values outside the bounds clamp.
    pub fn scale(&self, j: usize, x: f64) -> f64 {
        scale_value(self.min[j], self.max[j], x)
    }

    pub fn transform(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
        if matrix.n_cols() != self.min.len() {
            return Err(FeatureError::Shape(format!("scaler has {} columns, matrix {}", self.min.len(), matrix.n_cols())));
        }
        let mut out = matrix.clone();
        for (j, c) in out.columns.iter_mut().enumerate() {
            for v in c.iter_mut() {
                *v = self.scale(j, *v);
            }
        }
        Ok(out)
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(j, &x)| self.scale(j, x)).collect()
    }
}

/// Fits on `fit_rows` and scales every row of the matrix.
pub fn minmax_fit_transform(
    matrix: &FeatureMatrix,
    fit_rows: &[usize],
) -> Result<(FeatureMatrix, MinMaxScaler), FeatureError> {
    let scaler = MinMaxScaler::fit(matrix, fit_rows)?;
    Ok((scaler.transform(matrix)?, scaler))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(cols: &[(&str, &[f64])]) -> FeatureMatrix {
        let n = cols.first().map_or(0, |c| c.1.len());
        let mut m = FeatureMatrix::new((0..n).map(|i| format!("u{i}")).collect());
        for (name, values) in cols {
            m.push_column(ColumnName::new(Family::Behavioral, *name), values.to_vec()).unwrap();
        }
        m
    }

    #[test]
    fn minmax_examples() {
        let m = matrix(&[("a", &[2.0, 4.0, 6.0]), ("b", &[3.0, 3.0, 3.0])]);
        let (scaled, scaler) = minmax_fit_transform(&m, &[0, 1, 2]).unwrap();
        assert_eq!(scaled.column(0), [0.0, 0.5, 1.0]);
        assert_eq!(scaled.column(1), [0.0, 0.0, 0.0]);
        assert_eq!(scaler.scale(0, 8.0), 1.0);
        assert_eq!(scaler.scale(0, -1.0), 0.0);
    }

    #[test]
    fn minmax_uses_fit_rows_only() {
        let m = matrix(&[("a", &[0.0, 10.0, 100.0])]);
        let (scaled, _) = minmax_fit_transform(&m, &[0, 1]).unwrap();
        assert_eq!(scaled.column(0), [0.0, 1.0, 1.0]);
        assert!(MinMaxScaler::fit(&m, &[]).is_err());
    }

    #[test]
    fn sorting_and_duplicates() {
        let mut m = FeatureMatrix::new(vec!["u".into()]);
        m.push_column(ColumnName::new(Family::Pos, "NOUN"), vec![1.0]).unwrap();
        m.push_column(ColumnName::new(Family::Behavioral, "z"), vec![2.0]).unwrap();
        m.push_column(ColumnName::new(Family::Behavioral, "a"), vec![3.0]).unwrap();
        assert!(m.push_column(ColumnName::new(Family::Behavioral, "a"), vec![0.0]).is_err());
        m.sort_columns();
        let names: Vec<String> = m.names().iter().map(ToString::to_string).collect();
        assert_eq!(names, ["behavioral:a", "behavioral:z", "pos:NOUN"]);
        assert_eq!(m.row(0), [3.0, 2.0, 1.0]);
    }

    #[test]
    fn csv_roundtrip() {
        let mut m = matrix(&[("a", &[0.1, 1.0 / 3.0])]);
        m.push_column(ColumnName::new(Family::Ngram, "i love"), vec![0.0, 2.0]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("user,behavioral:a,ngram:i love\n"));
        assert_eq!(FeatureMatrix::read_csv(buf.as_slice()).unwrap(), m);
    }
}
