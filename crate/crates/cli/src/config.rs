use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use psyprofile::analysis::TsneConfig;
use psyprofile::corpus::SpamPolicy;
use psyprofile::emotion::{Aggregation, ClassifierConfig, PegasosParams};
use psyprofile::ml::{ChainMode, ForestParams};
use psyprofile::pipeline::{EvalConfig, FeatureConfig, ModelConfig};
use psyprofile::rng::derive_seed;
use psyprofile::textprep::{Fallback, TaggerConfig};
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");
pub const CONFIG_ENV: &str = "PSYPROFILE_CONFIG";

/// Stream labels for [`derive_seed`], one per seeded stage.
pub mod stream {
    pub const TAGGER: u64 = 1;
    pub const EMOTION: u64 = 2;
    pub const EVALUATE: u64 = 3;
    pub const TRAIN: u64 = 4;
    pub const EMBED: u64 = 5;
    pub const LEARNING_CURVE: u64 = 6;
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub synth: SynthSection,
    #[serde(default)]
    pub corpus: CorpusSection,
    #[serde(default)]
    pub textprep: TextprepSection,
    #[serde(default)]
    pub emotion: EmotionSection,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub ml: MlSection,
    #[serde(default)]
    pub learning_curve: LearningCurveSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub out_dir: PathBuf,
    pub lexicon: Option<PathBuf>,
    pub emoji_map: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub questionnaire_key: Option<PathBuf>,
    pub emotion_corpus: Option<PathBuf>,
    pub tagger_model: Option<PathBuf>,
    pub tagger_corpus: Option<PathBuf>,
    pub emotion_model: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            out_dir: PathBuf::from("out"),
            lexicon: None,
            emoji_map: None,
            stopwords: None,
            questionnaire_key: None,
            emotion_corpus: None,
            tagger_model: None,
            tagger_corpus: None,
            emotion_model: None,
        }
    }
}

impl Paths {
    fn resources(&self) -> [(&'static str, &Option<PathBuf>); 8] {
        [
            ("lexicon", &self.lexicon),
            ("emoji_map", &self.emoji_map),
            ("stopwords", &self.stopwords),
            ("questionnaire_key", &self.questionnaire_key),
            ("emotion_corpus", &self.emotion_corpus),
            ("tagger_model", &self.tagger_model),
            ("tagger_corpus", &self.tagger_corpus),
            ("emotion_model", &self.emotion_model),
        ]
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub spec: String,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection { spec: "default".into() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub hashtag_threshold: usize,
    pub similarity_threshold: f64,
    pub repetition_min: usize,
    pub min_statuses: u64,
    pub min_followers: u64,
    pub as_of: Option<DateTime<Utc>>,
}

impl Default for CorpusSection {
    fn default() -> Self {
        let p = SpamPolicy::default();
        CorpusSection {
            hashtag_threshold: p.hashtag_threshold,
            similarity_threshold: p.similarity_threshold,
            repetition_min: p.repetition_min,
            min_statuses: p.min_statuses,
            min_followers: p.min_followers,
            as_of: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FallbackName {
    Rules,
    Disabled,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextprepSection {
    pub fallback: FallbackName,
    pub epochs: usize,
    pub heldout_fraction: f64,
    pub lexicon_min_count: usize,
    pub lexicon_min_ratio: f64,
}

impl Default for TextprepSection {
    fn default() -> Self {
        let t = TaggerConfig::default();
        TextprepSection {
            fallback: FallbackName::Rules,
            epochs: t.epochs,
            heldout_fraction: t.heldout_fraction,
            lexicon_min_count: t.lexicon_min_count,
            lexicon_min_ratio: t.lexicon_min_ratio,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Flags,
    Semeval,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmotionSection {
    pub corpus_format: CorpusFormat,
    pub lambda: f64,
    pub epochs: usize,
    pub test_fraction: f64,
    pub min_df: usize,
    pub aggregation: Aggregation,
}

impl Default for EmotionSection {
    fn default() -> Self {
        let c = ClassifierConfig::default();
        EmotionSection {
            corpus_format: CorpusFormat::Flags,
            lambda: c.svm.lambda,
            epochs: c.svm.epochs,
            test_fraction: c.test_fraction,
            min_df: c.min_df,
            aggregation: c.aggregation,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlSection {
    pub folds: usize,
    pub n_chains: usize,
    pub n_trees: usize,
    pub max_features: f64,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub chain_mode: ChainMode,
    pub baseline_only: bool,
}

impl Default for MlSection {
    fn default() -> Self {
        let f = ForestParams::default();
        let m = ModelConfig::default();
        MlSection {
            folds: 5,
            n_chains: m.n_chains,
            n_trees: f.n_trees,
            max_features: f.max_features,
            min_samples_leaf: f.min_samples_leaf,
            max_depth: f.max_depth,
            bootstrap: f.bootstrap,
            chain_mode: m.mode,
            baseline_only: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningCurveSection {
    pub fractions: Vec<f64>,
    pub test_fraction: f64,
}

impl Default for LearningCurveSection {
    fn default() -> Self {
        LearningCurveSection { fractions: vec![0.4, 0.6, 0.8, 1.0], test_fraction: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedMethod {
    Tsne,
    Pca,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub method: EmbedMethod,
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: Option<f64>,
    pub early_exaggeration: f64,
    pub exaggeration_iters: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub momentum_switch_iter: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let t = TsneConfig::default();
        AnalysisSection {
            method: EmbedMethod::Tsne,
            perplexity: t.perplexity,
            iterations: t.iterations,
            learning_rate: t.learning_rate,
            early_exaggeration: t.early_exaggeration,
            exaggeration_iters: t.exaggeration_iters,
            initial_momentum: t.initial_momentum,
            final_momentum: t.final_momentum,
            momentum_switch_iter: t.momentum_switch_iter,
        }
    }
}

fn check(ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config(message))
    }
}

fn fraction(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads `path`, or the bundled default when `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Self::parse(DEFAULT_CONFIG),
            Some(p) => {
                let text =
                    std::fs::read_to_string(p).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
                Self::parse(&text).map_err(|e| CliError::config(format!("{}: {}", p.display(), e.message)))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let c = &self.corpus;
        check((0.0..=1.0).contains(&c.similarity_threshold), "corpus.similarity_threshold must lie in [0, 1]")?;
        check(c.repetition_min >= 1, "corpus.repetition_min must be at least 1")?;
        check(self.textprep.epochs >= 1, "textprep.epochs must be at least 1")?;
        check((0.0..0.9).contains(&self.textprep.heldout_fraction), "textprep.heldout_fraction must lie in [0, 0.9)")?;
        check(self.emotion.lambda > 0.0, "emotion.lambda must be positive")?;
        check(self.emotion.epochs >= 1, "emotion.epochs must be at least 1")?;
        check(fraction(self.emotion.test_fraction), "emotion.test_fraction must lie in (0, 1)")?;
        check(self.features.top_k >= 1, "features.top_k must be at least 1")?;
        check(self.features.min_df >= 1, "features.min_df must be at least 1")?;
        check(self.ml.folds >= 2, "ml.folds must be at least 2")?;
        check(self.ml.n_chains >= 1, "ml.n_chains must be at least 1")?;
        check(self.ml.n_trees >= 1, "ml.n_trees must be at least 1")?;
        check(self.ml.max_features > 0.0 && self.ml.max_features <= 1.0, "ml.max_features must lie in (0, 1]")?;
        check(self.ml.min_samples_leaf >= 1, "ml.min_samples_leaf must be at least 1")?;
        let lc = &self.learning_curve;
        check(!lc.fractions.is_empty(), "learning_curve.fractions must not be empty")?;
        check(lc.fractions.iter().all(|&f| f > 0.0 && f <= 1.0), "learning_curve.fractions must lie in (0, 1]")?;
        check(fraction(lc.test_fraction), "learning_curve.test_fraction must lie in (0, 1)")?;
        check(self.analysis.perplexity > 0.0, "analysis.perplexity must be positive")?;
        check(self.analysis.iterations >= 1, "analysis.iterations must be at least 1")?;
        Ok(())
    }

    /// Every configured resource path must exist before any command runs.
    pub fn check_paths(&self) -> Result<()> {
        for (key, path) in self.paths.resources() {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(CliError::new(
                        crate::error::Class::MissingInput,
                        format!("paths.{key}: {} does not exist", p.display()),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn stage_seed(&self, stream: u64) -> u64 {
        derive_seed(self.seed, stream)
    }

    pub fn spam_policy(&self) -> SpamPolicy {
        let c = &self.corpus;
        SpamPolicy {
            hashtag_threshold: c.hashtag_threshold,
            similarity_threshold: c.similarity_threshold,
            repetition_min: c.repetition_min,
            min_statuses: c.min_statuses,
            min_followers: c.min_followers,
        }
    }

    pub fn fallback(&self) -> Fallback {
        match self.textprep.fallback {
            FallbackName::Rules => Fallback::Rules,
            FallbackName::Disabled => Fallback::Disabled,
        }
    }

    pub fn tagger_config(&self) -> TaggerConfig {
        let t = &self.textprep;
        TaggerConfig {
            epochs: t.epochs,
            seed: self.stage_seed(stream::TAGGER),
            heldout_fraction: t.heldout_fraction,
            lexicon_min_count: t.lexicon_min_count,
            lexicon_min_ratio: t.lexicon_min_ratio,
        }
    }

    pub fn classifier_config(&self) -> ClassifierConfig {
        let e = &self.emotion;
        ClassifierConfig {
            svm: PegasosParams { lambda: e.lambda, epochs: e.epochs },
            test_fraction: e.test_fraction,
            min_df: e.min_df,
            seed: self.stage_seed(stream::EMOTION),
            aggregation: e.aggregation,
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        let m = &self.ml;
        ModelConfig {
            n_chains: m.n_chains,
            forest: ForestParams {
                n_trees: m.n_trees,
                max_features: m.max_features,
                min_samples_leaf: m.min_samples_leaf,
                max_depth: m.max_depth,
                bootstrap: m.bootstrap,
            },
            mode: m.chain_mode,
        }
    }

    pub fn eval_config(&self, stream: u64) -> EvalConfig {
        EvalConfig {
            folds: self.ml.folds,
            seed: self.stage_seed(stream),
            features: self.features.clone(),
            model: self.model_config(),
            baseline_only: self.ml.baseline_only,
        }
    }

    pub fn tsne_config(&self) -> TsneConfig {
        let a = &self.analysis;
        TsneConfig {
            perplexity: a.perplexity,
            iterations: a.iterations,
            learning_rate: a.learning_rate,
            early_exaggeration: a.early_exaggeration,
            exaggeration_iters: a.exaggeration_iters,
            initial_momentum: a.initial_momentum,
            final_momentum: a.final_momentum,
            momentum_switch_iter: a.momentum_switch_iter,
            seed: self.stage_seed(stream::EMBED),
        }
    }
}
