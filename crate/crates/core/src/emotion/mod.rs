//! Lexicon, emoji and sentiment attributes and the six-head linear SVM that
//! turns them into a per-user emotion vector.

mod attrs;
mod classifier;
mod emoji;
mod lexicon;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use attrs::{sentiment_scores, text_emotion_freq};
pub use classifier::{
    parse_emotion_corpus, parse_semeval_ec, predict_emotion_vector, train_emotion_classifier, Aggregation,
    ClassifierConfig, EmotionClassifier, EmotionResources, LabeledText, TrainingReport,
};
pub use emoji::{emoji_emotion_freq, EmojiMap};
pub use lexicon::{expand_lexicon, AffectLexicon, LineDiagnostic};
pub use svm::{logistic, train_pegasos, LinearHead, PegasosParams, SparseRow};

#[derive(Debug, Error)]
pub enum EmotionError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown emotion `{0}`")]
    UnknownEmotion(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("emotion corpus is empty")]
    EmptyCorpus,
    #[error("classifier expects {expected} attributes, got {got}")]
    LayoutMismatch { expected: usize, got: usize },
    #[error("invalid classifier: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Features(#[from] crate::features::FeatureError),
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String, EmotionError> {
    std::fs::read_to_string(path).map_err(|source| EmotionError::Io { path: path.display().to_string(), source })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Joy,
    Sadness,
    Anger,
    Disgust,
    Fear,
    Surprise,
}

impl Emotion {
    pub const ALL: [Emotion; 6] =
        [Emotion::Joy, Emotion::Sadness, Emotion::Anger, Emotion::Disgust, Emotion::Fear, Emotion::Surprise];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
            Emotion::Anger => "anger",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Surprise => "surprise",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = EmotionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Emotion::ALL.into_iter().find(|e| e.name() == lower).ok_or_else(|| EmotionError::UnknownEmotion(s.to_string()))
    }
}

/// Six scores in `[0, 1]`, ordered as [`Emotion::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EmotionVector(pub [f64; 6]);

impl EmotionVector {
    pub fn get(&self, e: Emotion) -> f64 {
        self.0[e.index()]
    }
}
