//! Seeded synthetic corpora. Each user's traits are drawn from per-trait
//! marginals and linear recipes; planted signals then tie the intensity of
//! text banks, emoji use and profile counters to chosen traits.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{PsychTrait, TraitProfile, Tweet, UserProfile, UserRecord};
use crate::emotion::Emotion;
use crate::features::{ColumnName, Family};
use crate::rng::{derive_seed, rng_from};
use crate::textprep::stem;

pub const DEFAULT_SPEC: &str = include_str!("../../data/synth_default.json");
pub const STRONG_SPEC: &str = include_str!("../../data/synth_strong.json");

const TRAIT_STREAM: u64 = 1;
const TEXT_STREAM: u64 = 2;

/// Profile and posting behaviors a behavioral signal can drive.
pub const BEHAVIORAL_CHANNELS: [&str; 12] = [
    "followers",
    "statuses",
    "listed",
    "favourites",
    "account_age",
    "bio_length",
    "mentions",
    "hashtags",
    "urls",
    "uppercase",
    "retweets",
    "tweet_length",
];

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    Invalid(String),
    #[error("bank `{0}` is empty or missing")]
    EmptyBank(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marginal {
    /// Beta distribution with the given mean and standard deviation.
    Beta { mean: f64, std: f64 },
    Uniform { low: f64, high: f64 },
}

impl Marginal {
    /// Moment-matched Beta marginals of the reference sample, on the `[0, 1]` scale.
    pub fn reference(t: PsychTrait) -> Marginal {
        let (mean, std, scale) = match t {
            PsychTrait::Anxiety => (3.08, 1.44, 7.0),
            PsychTrait::Avoidance => (3.72, 1.25, 7.0),
            PsychTrait::Openness => (4.10, 0.77, 5.0),
            PsychTrait::Conscientiousness => (3.69, 0.89, 5.0),
            PsychTrait::Extraversion => (2.65, 1.09, 5.0),
            PsychTrait::Agreeableness => (3.89, 0.84, 5.0),
            PsychTrait::Neuroticism => (2.45, 1.06, 5.0),
        };
        Marginal::Beta { mean: (mean - 1.0) / (scale - 1.0), std: std / (scale - 1.0) }
    }

    fn validate(&self) -> Result<(), String> {
        match *self {
            Marginal::Beta { mean, std } => {
                if !(mean > 0.0 && mean < 1.0 && std > 0.0 && std * std < mean * (1.0 - mean)) {
                    return Err(format!("no Beta distribution has mean {mean} and std {std}"));
                }
            }
            Marginal::Uniform { low, high } => {
                if !(0.0 <= low && low <= high && high <= 1.0) {
                    return Err(format!("uniform bounds [{low}, {high}] outside [0, 1]"));
                }
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Marginal::Beta { mean, std } => {
                let common = mean * (1.0 - mean) / (std * std) - 1.0;
                Beta::new(mean * common, (1.0 - mean) * common).expect("validated").sample(rng)
            }
            Marginal::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
        }
    }
}

/// `target = offset + weight · source + N(0, noise²)`, clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub target: PsychTrait,
    pub source: PsychTrait,
    pub weight: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub noise: f64,
}

/// Ties one channel's intensity to a trait: `effect · t + (1 − Σ effects) · u`
/// with `u` uniform per user (`1 − t` when `inverse`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub family: Family,
    #[serde(rename = "trait")]
    pub psych_trait: PsychTrait,
    pub effect: f64,
    /// Word bank, phrase bank, emotion name or behavioral channel, by family.
    pub channel: String,
    #[serde(default)]
    pub inverse: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Banks {
    pub neutral: Vec<String>,
    /// Single-word banks, used by `tfidf` and `pos` signals.
    pub words: BTreeMap<String, Vec<String>>,
    /// Contiguous phrases, used by `ngram` signals.
    pub phrases: BTreeMap<String, Vec<String>>,
    pub emotion_words: BTreeMap<Emotion, Vec<String>>,
    pub emojis: BTreeMap<Emotion, Vec<String>>,
}

/// Per-tweet probabilities at full intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Rates {
    pub word: f64,
    pub phrase: f64,
    pub emotion: f64,
    pub emoji: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Rates { word: 0.4, phrase: 0.35, emotion: 0.4, emoji: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_users: usize,
    pub seed: u64,
    #[serde(default = "default_tweets")]
    pub tweets_per_user: (usize, usize),
    #[serde(default = "default_words")]
    pub words_per_tweet: (usize, usize),
    /// Marginals by trait; missing traits use [`Marginal::reference`].
    #[serde(default)]
    pub traits: BTreeMap<PsychTrait, Marginal>,
    #[serde(default)]
    pub recipes: Vec<Recipe>,
    #[serde(default)]
    pub signals: Vec<Signal>,
    pub banks: Banks,
    #[serde(default)]
    pub rates: Rates,
    /// Extra contest-spam users appended after the regular ones.
    #[serde(default)]
    pub spam_users: usize,
    #[serde(default = "default_as_of")]
    pub as_of: DateTime<Utc>,
}

fn default_tweets() -> (usize, usize) {
    (30, 50)
}

fn default_words() -> (usize, usize) {
    (6, 12)
}

fn default_as_of() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap()
}

/// What a channel key refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Channel<'a> {
    Word(&'a str),
    Phrase(&'a str),
    Emotion(Emotion),
    Behavior(&'a str),
}

impl SynthSpec {
    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        let spec: SynthSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn bundled_default() -> Self {
        Self::from_json(DEFAULT_SPEC).expect("bundled spec is valid")
    }

    pub fn bundled_strong() -> Self {
        Self::from_json(STRONG_SPEC).expect("bundled spec is valid")
    }

    pub fn marginal(&self, t: PsychTrait) -> Marginal {
        self.traits.get(&t).copied().unwrap_or_else(|| Marginal::reference(t))
    }

    fn channel<'a>(&self, s: &'a Signal) -> Result<Channel<'a>, SynthError> {
        let c = s.channel.as_str();
        let bank = |m: &BTreeMap<String, Vec<String>>| match m.get(c) {
            Some(b) if !b.is_empty() => Ok(()),
            _ => Err(SynthError::EmptyBank(c.to_string())),
        };
        Ok(match s.family {
            Family::Tfidf | Family::Pos => {
                bank(&self.banks.words)?;
                Channel::Word(c)
            }
            Family::Ngram => {
                bank(&self.banks.phrases)?;
                Channel::Phrase(c)
            }
            Family::Emotion => {
                let e: Emotion = c.parse().map_err(|_| SynthError::Invalid(format!("unknown emotion `{c}`")))?;
                if self.banks.emotion_words.get(&e).is_none_or(Vec::is_empty) {
                    return Err(SynthError::EmptyBank(format!("emotion_words.{e}")));
                }
                Channel::Emotion(e)
            }
            Family::Behavioral => {
                if !BEHAVIORAL_CHANNELS.contains(&c) {
                    return Err(SynthError::Invalid(format!("unknown behavioral channel `{c}`")));
                }
                Channel::Behavior(c)
            }
        })
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let invalid = |m: String| Err(SynthError::Invalid(m));
        if self.n_users == 0 {
            return invalid("n_users must be at least 1".into());
        }
        if self.banks.neutral.is_empty() {
            return Err(SynthError::EmptyBank("neutral".into()));
        }
        let (t0, t1) = self.tweets_per_user;
        let (w0, w1) = self.words_per_tweet;
        if t0 == 0 || t0 > t1 || w0 == 0 || w0 > w1 {
            return invalid("tweet and word count ranges must be non-empty and start at 1 or more".into());
        }
        for t in PsychTrait::ALL {
            self.marginal(t).validate().map_err(SynthError::Invalid)?;
        }
        for r in &self.recipes {
            if r.target == r.source || !(r.noise >= 0.0) || !r.weight.is_finite() || !r.offset.is_finite() {
                return invalid(format!("bad recipe for {}", r.target));
            }
        }
        for bank in self.banks.words.values().chain(self.banks.phrases.values()) {
            if bank.iter().any(|w| w.trim().is_empty()) {
                return invalid("banks may not contain empty entries".into());
            }
        }
        let mut totals: BTreeMap<Channel, f64> = BTreeMap::new();
        for s in &self.signals {
            if !(0.0..=1.0).contains(&s.effect) {
                return invalid(format!("effect {} outside [0, 1]", s.effect));
            }
            *totals.entry(self.channel(s)?).or_default() += s.effect;
        }
        if let Some((c, total)) = totals.iter().find(|(_, t)| **t > 1.0 + 1e-12) {
            return invalid(format!("effects on channel {c:?} sum to {total} > 1"));
        }
        Ok(())
    }

    /// Feature columns each signal drives directly, with its trait.
    pub fn planted_columns(&self) -> Vec<(ColumnName, PsychTrait)> {
        let mut out = Vec::new();
        for s in &self.signals {
            let c = s.channel.as_str();
            match s.family {
                Family::Tfidf => {
                    for w in &self.banks.words[c] {
                        out.push((ColumnName::new(Family::Tfidf, stem(&w.to_lowercase())), s.psych_trait));
                    }
                }
                Family::Ngram => {
                    for p in &self.banks.phrases[c] {
                        let stems: Vec<String> = p.split_whitespace().map(|w| stem(&w.to_lowercase())).collect();
                        if stems.len() >= 2 {
                            out.push((ColumnName::new(Family::Ngram, stems.join(" ")), s.psych_trait));
                        }
                    }
                }
                Family::Emotion => out.push((ColumnName::new(Family::Emotion, c), s.psych_trait)),
                Family::Pos | Family::Behavioral => {}
            }
        }
        out
    }
}

fn user_seed(spec: &SynthSpec, index: usize) -> u64 {
    derive_seed(spec.seed, index as u64)
}

fn draw_traits(spec: &SynthSpec, index: usize) -> TraitProfile {
    let mut rng = rng_from(derive_seed(user_seed(spec, index), TRAIT_STREAM));
    let mut values = [0.0; 7];
    for t in PsychTrait::ALL {
        values[t.index()] = spec.marginal(t).sample(&mut rng);
    }
    for r in &spec.recipes {
        let noise = if r.noise > 0.0 { Normal::new(0.0, r.noise).expect("validated").sample(&mut rng) } else { 0.0 };
        values[r.target.index()] = (r.offset + r.weight * values[r.source.index()] + noise).clamp(0.0, 1.0);
    }
    TraitProfile::new(values)
}

/// Generating trait values of the user at `index` (the number in its handle).
pub fn oracle_traits(spec: &SynthSpec, index: usize) -> TraitProfile {
    draw_traits(spec, index)
}

/// Index encoded in a generated handle, e.g. `synth00042` → 42.
pub fn handle_index(handle: &str) -> Option<usize> {
    handle.strip_prefix("synth").or_else(|| handle.strip_prefix("spam")).and_then(|d| d.parse().ok())
}

struct Intensities<'a> {
    words: BTreeMap<&'a str, f64>,
    phrases: BTreeMap<&'a str, f64>,
    emotions: [f64; 6],
    behavior: BTreeMap<&'a str, f64>,
}

fn intensities<'a>(spec: &'a SynthSpec, traits: &TraitProfile, rng: &mut ChaCha8Rng) -> Intensities<'a> {
    let mut drive: BTreeMap<Channel, (f64, f64)> = BTreeMap::new();
    for s in &spec.signals {
        let t = traits.get(s.psych_trait);
        let v = if s.inverse { 1.0 - t } else { t };
        let e = drive.entry(spec.channel(s).expect("validated")).or_default();
        e.0 += s.effect * v;
        e.1 += s.effect;
    }
    let mut level = |c: Channel| {
        let u: f64 = rng.random();
        let (driven, total) = drive.get(&c).copied().unwrap_or_default();
        (driven + (1.0 - total) * u).clamp(0.0, 1.0)
    };
    let words = spec.banks.words.keys().map(|k| (k.as_str(), level(Channel::Word(k)))).collect();
    let phrases = spec.banks.phrases.keys().map(|k| (k.as_str(), level(Channel::Phrase(k)))).collect();
    let emotions = Emotion::ALL.map(|e| level(Channel::Emotion(e)));
    let behavior = BEHAVIORAL_CHANNELS.iter().map(|&c| (c, level(Channel::Behavior(c)))).collect();
    Intensities { words, phrases, emotions, behavior }
}

fn log_scale(lo: f64, hi: f64, i: f64) -> u64 {
    (lo * (hi / lo).powf(i)).round() as u64
}

fn insert_at(words: &mut Vec<String>, item: String, rng: &mut ChaCha8Rng) {
    let pos = rng.random_range(0..=words.len());
    words.insert(pos, item);
}

fn pick(bank: &[String], rng: &mut ChaCha8Rng) -> String {
    bank.choose(rng).expect("validated non-empty").clone()
}

fn build_user(spec: &SynthSpec, index: usize) -> UserRecord {
    let traits = draw_traits(spec, index);
    let mut rng = rng_from(derive_seed(user_seed(spec, index), TEXT_STREAM));
    let lv = intensities(spec, &traits, &mut rng);
    let b = |c: &str| lv.behavior[c];
    let banks = &spec.banks;
    let rates = spec.rates;

    let age_days = 100 + (2900.0 * b("account_age")).round() as u64;
    let account_created = spec.as_of - Duration::days(age_days as i64);
    let n_tweets = rng.random_range(spec.tweets_per_user.0..=spec.tweets_per_user.1);
    let (w0, w1) = spec.words_per_tweet;
    let mut tweets = Vec::with_capacity(n_tweets);
    let window = (age_days.min(365) * 86_400) as i64;
    for k in 0..n_tweets {
        let share = 0.7 * b("tweet_length") + 0.3 * rng.random::<f64>();
        let n_words = w0 + ((w1 - w0) as f64 * share).round() as usize;
        let mut words: Vec<String> = (0..n_words)
            .map(|_| {
                let w = pick(&banks.neutral, &mut rng);
                if rng.random::<f64>() < 0.3 * b("uppercase") {
                    w.to_uppercase()
                } else {
                    w
                }
            })
            .collect();
        for (name, bank) in &banks.words {
            if rng.random::<f64>() < rates.word * lv.words[name.as_str()] {
                let w = pick(bank, &mut rng);
                insert_at(&mut words, w, &mut rng);
            }
        }
        for (name, bank) in &banks.phrases {
            if rng.random::<f64>() < rates.phrase * lv.phrases[name.as_str()] {
                let p = pick(bank, &mut rng);
                insert_at(&mut words, p, &mut rng);
            }
        }
        let mut emojis = String::new();
        for e in Emotion::ALL {
            let level = lv.emotions[e.index()];
            if let Some(bank) = banks.emotion_words.get(&e).filter(|b| !b.is_empty()) {
                if rng.random::<f64>() < rates.emotion * level {
                    let w = pick(bank, &mut rng);
                    insert_at(&mut words, w, &mut rng);
                }
            }
            if let Some(bank) = banks.emojis.get(&e).filter(|b| !b.is_empty()) {
                if rng.random::<f64>() < rates.emoji * level {
                    emojis.push_str(&pick(bank, &mut rng));
                }
            }
        }
        if rng.random::<f64>() < 0.6 * b("hashtags") {
            let w = pick(&banks.neutral, &mut rng);
            words.push(format!("#{w}"));
        }
        if rng.random::<f64>() < 0.6 * b("mentions") {
            words.insert(0, format!("@friend{}", rng.random_range(0..50)));
        }
        if rng.random::<f64>() < 0.5 * b("urls") {
            words.push(format!("https://t.co/{index}x{k}"));
        }
        if !emojis.is_empty() {
            words.push(emojis);
        }
        let is_retweet = rng.random::<f64>() < 0.5 * b("retweets");
        if is_retweet {
            words.splice(0..0, ["RT".to_string(), format!("@friend{}:", rng.random_range(0..50))]);
        }
        let offset = window * (k as i64 + 1) / (n_tweets as i64 + 1);
        let created_at = spec.as_of - Duration::seconds(window) + Duration::seconds(offset);
        tweets.push(Tweet::new(format!("{index}-{k}"), words.join(" "), created_at, is_retweet));
    }
    let bio_words = 2 + (18.0 * b("bio_length")).round() as usize;
    let bio = (0..bio_words).map(|_| pick(&banks.neutral, &mut rng)).collect::<Vec<_>>().join(" ");
    let profile = UserProfile {
        handle: format!("synth{index:05}"),
        statuses_count: log_scale(200.0, 10_000.0, b("statuses")).max(n_tweets as u64),
        followers_count: log_scale(10.0, 5000.0, b("followers")),
        listed_count: log_scale(1.0, 200.0, b("listed")) - 1,
        favourites_count: log_scale(10.0, 10_000.0, b("favourites")),
        bio,
        account_created,
        account_age_days: age_days,
    };
    UserRecord { profile, tweets, label: Some(traits) }
}

fn build_spammer(spec: &SynthSpec, index: usize) -> UserRecord {
    let mut rng = rng_from(derive_seed(user_seed(spec, index), TEXT_STREAM));
    let tags: Vec<String> = (0..6).map(|_| format!("#{}", pick(&spec.banks.neutral, &mut rng))).collect();
    let n = 10;
    let tweets = (0..n)
        .map(|k| {
            let text = format!("win free prize now {} enter contest", tags.join(" "));
            let at = spec.as_of - Duration::days(n as i64 - k as i64);
            Tweet::new(format!("spam{index}-{k}"), text, at, false)
        })
        .collect();
    let profile = UserProfile {
        handle: format!("spam{index:05}"),
        statuses_count: 500,
        followers_count: 50,
        listed_count: 0,
        favourites_count: 0,
        bio: "giveaways daily".into(),
        account_created: spec.as_of - Duration::days(400),
        account_age_days: 400,
    };
    UserRecord { profile, tweets, label: Some(draw_traits(spec, index)) }
}

/// Labeled users, regular ones first and spam users after. Each user has
/// its own derived seed, so the output does not depend on thread count.
pub fn generate(spec: &SynthSpec) -> Result<Vec<UserRecord>, SynthError> {
    spec.validate()?;
    let mut users: Vec<UserRecord> = (0..spec.n_users).into_par_iter().map(|i| build_user(spec, i)).collect();
    users.extend((spec.n_users..spec.n_users + spec.spam_users).map(|i| build_spammer(spec, i)));
    Ok(users)
}
