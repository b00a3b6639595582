//! Trait statistics, Pearson correlation with significance, group
//! comparison and 2-D embeddings.

mod correlation;
mod embed;
mod groups;
mod special;
mod stats;

use thiserror::Error;

pub use correlation::{feature_trait_matrix, stars, trait_trait_matrix, CorrelationEntry, CorrelationReport};
pub use embed::{pca_2d, tsne, Embedding2D, TsneConfig};
pub use groups::{empirical_cdf, grid, group_compare, write_group_cdfs, write_group_means, TraitComparison, CDF_GRID_POINTS};
pub use special::{ln_gamma, reg_inc_beta, student_t_two_tailed};
pub use stats::{describe, pearson, pearson_r, trait_stats, write_trait_stats, Pearson, TraitStats};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("input is empty")]
    Empty,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("perplexity {perplexity} needs at least 2·perplexity + 1 points, got {n}")]
    PerplexityTooLarge { perplexity: f64, n: usize },
    #[error("rows have different lengths")]
    Ragged,
    #[error("non-finite value in input or result")]
    NonFinite,
}
