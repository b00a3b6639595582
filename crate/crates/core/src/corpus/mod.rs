//! Users, tweets and trait labels.
//!
//! Ingestion reads one user per JSONL line, labels come either as
//! pre-computed trait scores or as raw questionnaire responses scored
//! against a [`QuestionnaireKey`], and [`filter_spam`] removes spam users,
//! spam tweets and ghost accounts.

mod load;
mod questionnaire;
mod spam;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use load::{load_users, parse_users, write_users, Diagnostic, LoadOptions, LoadOutcome, RawTweet, RawUser};
pub use questionnaire::{normalize_traits, score_questionnaire, KeyItem, QuestionnaireKey, RawTraits};
pub use spam::{filter_spam, jaccard, write_removal_report, Removal, RemovalRule, SpamPolicy};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("unknown trait name `{0}`")]
    UnknownTrait(String),
    #[error("item `{item}`: response {value} outside 1..={scale_max}")]
    ResponseOutOfScale { item: String, value: i64, scale_max: u8 },
    #[error("item `{0}` is not in the questionnaire key")]
    UnknownItem(String),
    #[error("no score for trait `{0}`")]
    MissingTrait(PsychTrait),
    #[error("raw score {value} for `{name}` outside [1, {scale_max}]")]
    RawOutOfRange { name: PsychTrait, value: f64, scale_max: u8 },
    #[error("invalid questionnaire key: {0}")]
    InvalidKey(String),
}

/// The seven predicted traits, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsychTrait {
    Anxiety,
    Avoidance,
    Openness,
    Conscientiousness,
    Extraversion,
    Agreeableness,
    Neuroticism,
}

impl PsychTrait {
    pub const ALL: [PsychTrait; 7] = [
        PsychTrait::Anxiety,
        PsychTrait::Avoidance,
        PsychTrait::Openness,
        PsychTrait::Conscientiousness,
        PsychTrait::Extraversion,
        PsychTrait::Agreeableness,
        PsychTrait::Neuroticism,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            PsychTrait::Anxiety => "anxiety",
            PsychTrait::Avoidance => "avoidance",
            PsychTrait::Openness => "openness",
            PsychTrait::Conscientiousness => "conscientiousness",
            PsychTrait::Extraversion => "extraversion",
            PsychTrait::Agreeableness => "agreeableness",
            PsychTrait::Neuroticism => "neuroticism",
        }
    }

    /// Attachment orientations use a 7-point instrument, the Big Five a 5-point one.
    pub fn scale_max(self) -> u8 {
        if self.is_attachment() {
            7
        } else {
            5
        }
    }

    pub fn is_attachment(self) -> bool {
        matches!(self, PsychTrait::Anxiety | PsychTrait::Avoidance)
    }
}

impl fmt::Display for PsychTrait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PsychTrait {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        PsychTrait::ALL
            .into_iter()
            .find(|t| t.name() == lower)
            .ok_or_else(|| CorpusError::UnknownTrait(s.to_string()))
    }
}

/// Seven normalized trait scores, indexed by [`PsychTrait`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraitProfile([f64; 7]);

impl TraitProfile {
    /// Values outside `[0, 1]` are clamped.
    pub fn new(values: [f64; 7]) -> Self {
        TraitProfile(values.map(|v| v.clamp(0.0, 1.0)))
    }

    pub fn get(&self, t: PsychTrait) -> f64 {
        self.0[t.index()]
    }

    pub fn set(&mut self, t: PsychTrait, value: f64) {
        self.0[t.index()] = value.clamp(0.0, 1.0);
    }

    pub fn values(&self) -> &[f64; 7] {
        &self.0
    }
}

impl Serialize for TraitProfile {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(7))?;
        for t in PsychTrait::ALL {
            map.serialize_entry(t.name(), &self.get(t))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for TraitProfile {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = std::collections::BTreeMap::<PsychTrait, f64>::deserialize(deserializer)?;
        let mut values = [0.0; 7];
        for t in PsychTrait::ALL {
            let v = *map
                .get(&t)
                .ok_or_else(|| serde::de::Error::custom(format!("missing trait `{t}`")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(serde::de::Error::custom(format!("trait `{t}` = {v} outside [0,1]")));
            }
            values[t.index()] = v;
        }
        Ok(TraitProfile(values))
    }
}

/// A single post. Hashtag and mention counts are derived from the raw text.
#[derive(Debug, Clone, PartialEq)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    pub created_at: DateTime<Utc>,
    pub is_retweet: bool,
}

impl Tweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>, created_at: DateTime<Utc>, is_retweet: bool) -> Self {
        Tweet { id: id.into(), text: text.into(), created_at, is_retweet }
    }

    /// Number of whitespace tokens starting with `#`.
    pub fn hashtag_count(&self) -> usize {
        self.text.split_whitespace().filter(|t| t.starts_with('#')).count()
    }

    /// Number of whitespace tokens starting with `@`.
    pub fn mention_count(&self) -> usize {
        self.text.split_whitespace().filter(|t| t.starts_with('@')).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    pub handle: String,
    pub statuses_count: u64,
    pub followers_count: u64,
    pub listed_count: u64,
    pub favourites_count: u64,
    pub bio: String,
    pub account_created: DateTime<Utc>,
    /// Always ≥ 1 so that rate features never divide by zero.
    pub account_age_days: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserRecord {
    pub profile: UserProfile,
    pub tweets: Vec<Tweet>,
    pub label: Option<TraitProfile>,
}
