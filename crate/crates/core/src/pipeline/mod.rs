//! End-to-end glue: per-user preprocessing, fold-local feature fitting,
//! cross-validated evaluation and persisted models.

mod evaluate;
mod fit;
mod model;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{PsychTrait, TraitProfile, UserRecord};
use crate::emotion::{EmotionClassifier, EmotionError, EmotionResources};
use crate::features::{behavioral_vector, FeatureError};
use crate::ml::{ChainMode, ForestParams, MlError};
use crate::textprep::{clean, prepare_tokens, tag, tokenize, Fallback, Stopwords, TaggerModel, TextError};

pub use evaluate::{
    evaluate, learning_curve, write_learning_curve, write_model_report, write_predictions, write_trait_report,
    EvalConfig, Evaluation, TraitResult,
};
pub use fit::{FeatureBlock, FeaturePipeline, KeptColumn};
pub use model::{predict, train, write_prediction_csv, Prediction, TrainedModel, TRAINED_VERSION};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Emotion(#[from] EmotionError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error("user `{0}` has no trait label")]
    Unlabeled(String),
    #[error("need at least {needed} labeled users, got {got}")]
    TooFewUsers { needed: usize, got: usize },
    #[error("feature layout mismatch: {0}")]
    Layout(String),
    #[error("malformed artifact: {0}")]
    Format(String),
}

/// Feature set feeding one trait's regressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Behavioral,
    Tfidf,
    Ngram,
    Pos,
    Emotion,
    /// Behavioral, the three selected text families and emotion.
    All,
}

impl Route {
    pub const ALL: [Route; 6] = [Route::Behavioral, Route::Tfidf, Route::Ngram, Route::Pos, Route::Emotion, Route::All];

    pub fn as_str(self) -> &'static str {
        match self {
            Route::Behavioral => "behavioral",
            Route::Tfidf => "tfidf",
            Route::Ngram => "ngram",
            Route::Pos => "pos",
            Route::Emotion => "emotion",
            Route::All => "all",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Route {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Route::ALL.into_iter().find(|r| r.as_str() == s).ok_or_else(|| format!("unknown feature route `{s}`"))
    }
}

/// Route per trait; missing traits use [`RouteMap::best_sets`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "BTreeMap<PsychTrait, Route>", into = "BTreeMap<PsychTrait, Route>")]
pub struct RouteMap([Route; 7]);

impl RouteMap {
    /// Default route per trait.
    pub fn best_sets() -> Self {
        RouteMap([Route::Ngram, Route::Pos, Route::Pos, Route::All, Route::All, Route::Tfidf, Route::Emotion])
    }

    pub fn uniform(route: Route) -> Self {
        RouteMap([route; 7])
    }

    pub fn get(&self, t: PsychTrait) -> Route {
        self.0[t.index()]
    }

    pub fn set(&mut self, t: PsychTrait, route: Route) {
        self.0[t.index()] = route;
    }
}

impl Default for RouteMap {
    fn default() -> Self {
        Self::best_sets()
    }
}

impl From<BTreeMap<PsychTrait, Route>> for RouteMap {
    fn from(m: BTreeMap<PsychTrait, Route>) -> Self {
        let mut routes = RouteMap::best_sets();
        for (t, r) in m {
            routes.set(t, r);
        }
        routes
    }
}

impl From<RouteMap> for BTreeMap<PsychTrait, Route> {
    fn from(r: RouteMap) -> Self {
        PsychTrait::ALL.iter().map(|&t| (t, r.get(t))).collect()
    }
}

/// Vocabulary and selection settings. Two models can share test features
/// only when these agree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub min_df: usize,
    pub top_k: usize,
    pub routes: RouteMap,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { min_df: 2, top_k: 100, routes: RouteMap::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub n_chains: usize,
    pub forest: ForestParams,
    pub mode: ChainMode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { n_chains: 10, forest: ForestParams::default(), mode: ChainMode::default() }
    }
}

/// Everything needed to turn raw users into [`PreparedUser`]s.
pub struct Preprocessor {
    pub stopwords: Stopwords,
    pub tagger: TaggerModel,
    pub fallback: Fallback,
    pub emotion: EmotionClassifier,
    pub resources: EmotionResources,
}

/// A user reduced to what the feature families read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedUser {
    pub handle: String,
    pub behavioral: Vec<f64>,
    /// Cleaned, stopword-free, stemmed tokens per tweet.
    pub words: Vec<Vec<String>>,
    /// Tag names per tweet over the cleaned tokens, stopwords included.
    pub tags: Vec<Vec<String>>,
    pub emotion: Vec<f64>,
    pub label: Option<TraitProfile>,
}

impl PreparedUser {
    pub fn document(&self) -> Vec<&str> {
        self.words.iter().flatten().map(String::as_str).collect()
    }
}

impl Preprocessor {
    pub fn prepare_one(&self, user: &UserRecord) -> Result<PreparedUser, PipelineError> {
        let mut words = Vec::with_capacity(user.tweets.len());
        let mut tags = Vec::with_capacity(user.tweets.len());
        for t in &user.tweets {
            words.push(prepare_tokens(&t.text, &self.stopwords));
            let tagged = tag(&tokenize(&t.id, &clean(&t.text)), &self.tagger, self.fallback)?;
            tags.push(tagged.tagged.iter().map(|(_, tag)| tag.as_str().to_string()).collect());
        }
        let texts: Vec<&str> = user.tweets.iter().map(|t| t.text.as_str()).collect();
        let emotion = self.emotion.predict_user(&texts, &self.resources)?;
        Ok(PreparedUser {
            handle: user.profile.handle.clone(),
            behavioral: behavioral_vector(user).to_vec(),
            words,
            tags,
            emotion: emotion.0.to_vec(),
            label: user.label,
        })
    }

    /// Prepares users in parallel; output order matches input order.
    pub fn prepare(&self, users: &[UserRecord]) -> Result<Vec<PreparedUser>, PipelineError> {
        users.par_iter().map(|u| self.prepare_one(u)).collect()
    }
}

/// Writes one prepared user per line.
pub fn write_prepared<W: std::io::Write>(mut w: W, users: &[PreparedUser]) -> std::io::Result<()> {
    for u in users {
        serde_json::to_writer(&mut w, u)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_prepared<R: std::io::BufRead>(r: R) -> Result<Vec<PreparedUser>, PipelineError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| PipelineError::Format(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| PipelineError::Format(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

/// Trait columns of labeled users, canonical order.
pub fn label_columns(users: &[&PreparedUser]) -> Result<Vec<Vec<f64>>, PipelineError> {
    let mut cols = vec![Vec::with_capacity(users.len()); 7];
    for u in users {
        let label = u.label.ok_or_else(|| PipelineError::Unlabeled(u.handle.clone()))?;
        for t in PsychTrait::ALL {
            cols[t.index()].push(label.get(t));
        }
    }
    Ok(cols)
}
