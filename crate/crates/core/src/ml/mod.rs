//! Regression models: CART trees, random forests, the mean baseline,
//! regressor chains and the chain ensemble, plus metrics and evaluation splits.

mod chain;
mod forest;
mod grid;
mod split;
mod tree;

pub use chain::{
    distinct_orderings, fit_chain, fit_holistic, fit_independent, ChainInputs, ChainMode, ChainModel, ChainParams,
    HolisticModel, IndependentModel, MODEL_VERSION,
};
pub use forest::{fit_forest, ForestModel, ForestParams};
pub use grid::{grid_search, learning_curve, learning_curve_splits, GridCell, GridReport, LearningCurvePoint, DEFAULT_FRACTIONS, DEFAULT_TREE_GRID};
pub use split::{k_fold, train_test_split};
pub use tree::{fit_tree, split_threshold, TreeNode, TreeParams};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MlError {
    #[error("empty input")]
    Empty,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("model expects {expected} input columns, got {got}")]
    LayoutMismatch { expected: usize, got: usize },
    #[error("ordering is not a permutation of the seven traits: {0}")]
    BadOrdering(String),
    #[error("cannot draw {0} distinct chain orderings (at most 5040)")]
    TooManyChains(usize),
    #[error("model format: {0}")]
    Format(String),
}

fn check_pair(y: &[f64], yhat: &[f64]) -> Result<(), MlError> {
    if y.len() != yhat.len() {
        return Err(MlError::LengthMismatch(y.len(), yhat.len()));
    }
    if y.is_empty() {
        return Err(MlError::Empty);
    }
    Ok(())
}

pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64, MlError> {
    check_pair(y, yhat)?;
    let sse: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sse / y.len() as f64).sqrt())
}

pub fn mae(y: &[f64], yhat: &[f64]) -> Result<f64, MlError> {
    check_pair(y, yhat)?;
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

/// Always predicts the training mean.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BaselineModel {
    pub mean: f64,
}

pub fn fit_baseline(y_train: &[f64]) -> Result<BaselineModel, MlError> {
    if y_train.is_empty() {
        return Err(MlError::Empty);
    }
    Ok(BaselineModel { mean: y_train.iter().sum::<f64>() / y_train.len() as f64 })
}

impl BaselineModel {
    pub fn predict(&self) -> f64 {
        self.mean
    }

    pub fn predict_n(&self, n: usize) -> Vec<f64> {
        vec![self.mean; n]
    }
}
