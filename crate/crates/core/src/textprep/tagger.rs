//! Averaged-perceptron part-of-speech tagger over the universal tagset.
//!
//! Features per token: the word, its suffixes up to length 3, the previous
//! tag, the previous word and the next word. A closed-class lexicon takes
//! precedence over perceptron scores at tagging time.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{clean, TextError, TokenStream};
use crate::rng::rng_from;

/// Universal tags. Variant order is lexicographic, which is the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tag {
    Adj,
    Adp,
    Adv,
    Conj,
    Det,
    Noun,
    Num,
    Pron,
    Prt,
    Punct,
    Verb,
    X,
}

const N_TAGS: usize = 12;

impl Tag {
    pub const ALL: [Tag; N_TAGS] = [
        Tag::Adj,
        Tag::Adp,
        Tag::Adv,
        Tag::Conj,
        Tag::Det,
        Tag::Noun,
        Tag::Num,
        Tag::Pron,
        Tag::Prt,
        Tag::Punct,
        Tag::Verb,
        Tag::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Adj => "ADJ",
            Tag::Adp => "ADP",
            Tag::Adv => "ADV",
            Tag::Conj => "CONJ",
            Tag::Det => "DET",
            Tag::Noun => "NOUN",
            Tag::Num => "NUM",
            Tag::Pron => "PRON",
            Tag::Prt => "PRT",
            Tag::Punct => "PUNCT",
            Tag::Verb => "VERB",
            Tag::X => "X",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tag {
    type Err = TextError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        // A few common aliases from other universal-tagset dialects.
        let canonical = match upper.as_str() {
            "." => "PUNCT",
            "CCONJ" | "SCONJ" => "CONJ",
            "PROPN" => "NOUN",
            "AUX" => "VERB",
            "PART" => "PRT",
            "INTJ" | "SYM" => "X",
            other => other,
        };
        Tag::ALL
            .into_iter()
            .find(|t| t.as_str() == canonical)
            .ok_or_else(|| TextError::UnknownTag(s.to_string()))
    }
}

/// Tokens paired with tags; always the same length as its source stream.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaggedStream {
    pub tweet_id: String,
    pub tagged: Vec<(String, Tag)>,
}

impl TaggedStream {
    pub fn tags(&self) -> impl Iterator<Item = Tag> + '_ {
        self.tagged.iter().map(|(_, t)| *t)
    }
}

pub type TaggedSentence = Vec<(String, Tag)>;

/// Closed-class words of English; open-class words are left to the model.
const CLOSED_CLASS: &[(&str, Tag)] = &[
    ("a", Tag::Det), ("an", Tag::Det), ("the", Tag::Det), ("this", Tag::Det), ("these", Tag::Det),
    ("those", Tag::Det), ("every", Tag::Det), ("each", Tag::Det), ("some", Tag::Det), ("any", Tag::Det),
    ("no", Tag::Det), ("another", Tag::Det), ("all", Tag::Det), ("both", Tag::Det),
    ("i", Tag::Pron), ("me", Tag::Pron), ("my", Tag::Pron), ("mine", Tag::Pron), ("you", Tag::Pron),
    ("your", Tag::Pron), ("he", Tag::Pron), ("him", Tag::Pron), ("his", Tag::Pron), ("she", Tag::Pron),
    ("her", Tag::Pron), ("it", Tag::Pron), ("its", Tag::Pron), ("we", Tag::Pron), ("us", Tag::Pron),
    ("our", Tag::Pron), ("they", Tag::Pron), ("them", Tag::Pron), ("their", Tag::Pron),
    ("myself", Tag::Pron), ("yourself", Tag::Pron), ("themselves", Tag::Pron), ("who", Tag::Pron),
    ("whom", Tag::Pron), ("what", Tag::Pron), ("everyone", Tag::Pron), ("someone", Tag::Pron),
    ("nobody", Tag::Pron), ("everything", Tag::Pron), ("something", Tag::Pron), ("nothing", Tag::Pron),
    ("in", Tag::Adp), ("on", Tag::Adp), ("at", Tag::Adp), ("of", Tag::Adp), ("for", Tag::Adp),
    ("with", Tag::Adp), ("from", Tag::Adp), ("by", Tag::Adp), ("about", Tag::Adp), ("into", Tag::Adp),
    ("over", Tag::Adp), ("under", Tag::Adp), ("after", Tag::Adp), ("before", Tag::Adp),
    ("between", Tag::Adp), ("through", Tag::Adp), ("during", Tag::Adp), ("without", Tag::Adp),
    ("against", Tag::Adp), ("among", Tag::Adp), ("near", Tag::Adp),
    ("and", Tag::Conj), ("or", Tag::Conj), ("but", Tag::Conj), ("because", Tag::Conj), ("if", Tag::Conj),
    ("while", Tag::Conj), ("although", Tag::Conj), ("nor", Tag::Conj), ("unless", Tag::Conj),
    ("to", Tag::Prt), ("not", Tag::Prt), ("up", Tag::Prt), ("off", Tag::Prt),
    ("is", Tag::Verb), ("am", Tag::Verb), ("are", Tag::Verb), ("was", Tag::Verb), ("were", Tag::Verb),
    ("be", Tag::Verb), ("been", Tag::Verb), ("being", Tag::Verb), ("do", Tag::Verb), ("does", Tag::Verb),
    ("did", Tag::Verb), ("have", Tag::Verb), ("has", Tag::Verb), ("had", Tag::Verb), ("will", Tag::Verb),
    ("would", Tag::Verb), ("can", Tag::Verb), ("could", Tag::Verb), ("should", Tag::Verb),
    ("must", Tag::Verb), ("might", Tag::Verb), ("may", Tag::Verb), ("shall", Tag::Verb),
    ("very", Tag::Adv), ("too", Tag::Adv), ("so", Tag::Adv), ("just", Tag::Adv), ("never", Tag::Adv),
    ("always", Tag::Adv), ("often", Tag::Adv), ("here", Tag::Adv), ("there", Tag::Adv), ("now", Tag::Adv),
    ("then", Tag::Adv), ("again", Tag::Adv), ("really", Tag::Adv), ("also", Tag::Adv),
    ("one", Tag::Num), ("two", Tag::Num), ("three", Tag::Num), ("four", Tag::Num), ("five", Tag::Num),
    ("six", Tag::Num), ("seven", Tag::Num), ("eight", Tag::Num), ("nine", Tag::Num), ("ten", Tag::Num),
    ("hundred", Tag::Num), ("thousand", Tag::Num),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaggerConfig {
    pub epochs: usize,
    pub seed: u64,
    /// Fraction of sentences held out for the accuracy report (rounded down).
    pub heldout_fraction: f64,
    /// A training word enters the lexicon when seen at least this often...
    pub lexicon_min_count: usize,
    /// ...with this share of its occurrences under a single tag.
    pub lexicon_min_ratio: f64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig { epochs: 8, seed: 17, heldout_fraction: 0.1, lexicon_min_count: 5, lexicon_min_ratio: 0.97 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggerReport {
    pub train_tokens: usize,
    pub heldout_tokens: usize,
    pub train_accuracy: f64,
    /// `None` when nothing was held out.
    pub heldout_accuracy: Option<f64>,
}

/// Whether an untrained model may fall back to suffix rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    Rules,
    Disabled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    weights: HashMap<String, [f64; N_TAGS]>,
    lexicon: BTreeMap<String, Tag>,
}

#[derive(Serialize, Deserialize)]
struct PersistedTagger {
    tagset: Vec<Tag>,
    lexicon: BTreeMap<String, Tag>,
    weights: Vec<(String, Tag, f64)>,
}

const START: &str = "-START-";
const END: &str = "-END-";

fn features(words: &[String], i: usize, prev_tag: Option<Tag>) -> Vec<String> {
    let word = &words[i];
    let mut out = Vec::with_capacity(8);
    out.push("bias".to_string());
    out.push(format!("w={word}"));
    let chars: Vec<char> = word.chars().collect();
    for n in 1..=3.min(chars.len()) {
        let suffix: String = chars[chars.len() - n..].iter().collect();
        out.push(format!("s{n}={suffix}"));
    }
    out.push(format!("pt={}", prev_tag.map_or(START, Tag::as_str)));
    out.push(format!("pw={}", if i == 0 { START } else { &words[i - 1] }));
    out.push(format!("nw={}", words.get(i + 1).map_or(END, String::as_str)));
    out
}

fn argmax(scores: &[f64; N_TAGS]) -> Tag {
    let mut best = 0;
    for i in 1..N_TAGS {
        // strict comparison keeps the lexicographically smaller tag on ties
        if scores[i] > scores[best] {
            best = i;
        }
    }
    Tag::ALL[best]
}

/// Suffix heuristics used when no perceptron weights are available.
fn rule_tag(word: &str) -> Tag {
    if word.ends_with("ly") {
        Tag::Adv
    } else if word.ends_with("ing") || word.ends_with("ed") || word.ends_with("ize") || word.ends_with("ise") {
        Tag::Verb
    } else if ["ous", "ful", "ive", "able", "ible", "al", "ic", "less", "est"].iter().any(|s| word.ends_with(s)) {
        Tag::Adj
    } else {
        Tag::Noun
    }
}

impl TaggerModel {
    /// A model with only the closed-class lexicon; tagging requires [`Fallback::Rules`].
    pub fn rule_based() -> Self {
        TaggerModel { weights: HashMap::new(), lexicon: builtin_lexicon() }
    }

    pub fn is_trained(&self) -> bool {
        !self.weights.is_empty()
    }

    pub fn tagset(&self) -> &'static [Tag] {
        &Tag::ALL
    }

    pub fn lexicon(&self) -> &BTreeMap<String, Tag> {
        &self.lexicon
    }

    fn scores(&self, feats: &[String]) -> [f64; N_TAGS] {
        let mut scores = [0.0; N_TAGS];
        for f in feats {
            if let Some(w) = self.weights.get(f) {
                for (s, v) in scores.iter_mut().zip(w) {
                    *s += v;
                }
            }
        }
        scores
    }

    fn tag_words(&self, words: &[String], fallback: Fallback) -> Result<Vec<Tag>, TextError> {
        if !self.is_trained() && fallback == Fallback::Disabled {
            return Err(TextError::Untrained);
        }
        let mut tags = Vec::with_capacity(words.len());
        let mut prev = None;
        for (i, word) in words.iter().enumerate() {
            let tag = match self.lexicon.get(word) {
                Some(&t) => t,
                None if self.is_trained() => argmax(&self.scores(&features(words, i, prev))),
                None => rule_tag(word),
            };
            tags.push(tag);
            prev = Some(tag);
        }
        Ok(tags)
    }

    pub fn to_json(&self) -> String {
        let mut weights: Vec<(String, Tag, f64)> = self
            .weights
            .iter()
            .flat_map(|(f, w)| Tag::ALL.iter().zip(w).filter(|(_, v)| **v != 0.0).map(|(t, v)| (f.clone(), *t, *v)))
            .collect();
        weights.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
        let persisted = PersistedTagger { tagset: Tag::ALL.to_vec(), lexicon: self.lexicon.clone(), weights };
        serde_json::to_string(&persisted).expect("tagger serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TextError> {
        let p: PersistedTagger = serde_json::from_str(text).map_err(|e| TextError::InvalidModel(e.to_string()))?;
        if p.tagset != Tag::ALL {
            return Err(TextError::InvalidModel("tagset differs from the universal tagset".into()));
        }
        let mut weights: HashMap<String, [f64; N_TAGS]> = HashMap::new();
        for (f, t, v) in p.weights {
            if !v.is_finite() {
                return Err(TextError::InvalidModel(format!("non-finite weight for {f}")));
            }
            weights.entry(f).or_insert([0.0; N_TAGS])[t.index()] = v;
        }
        Ok(TaggerModel { weights, lexicon: p.lexicon })
    }
}

fn builtin_lexicon() -> BTreeMap<String, Tag> {
    CLOSED_CLASS.iter().map(|(w, t)| (w.to_string(), *t)).collect()
}

/// Tags a token stream.
pub fn tag(tokens: &TokenStream, model: &TaggerModel, fallback: Fallback) -> Result<TaggedStream, TextError> {
    let tags = model.tag_words(&tokens.tokens, fallback)?;
    Ok(TaggedStream {
        tweet_id: tokens.tweet_id.clone(),
        tagged: tokens.tokens.iter().cloned().zip(tags).collect(),
    })
}

/// Parses `word<TAB>tag` lines with blank lines between sentences. Words are
/// passed through [`clean`] so training sees the same token shapes as
/// tagging; tokens that clean to nothing (punctuation, numbers) are dropped.
pub fn parse_tagged_corpus<R: BufRead>(reader: R) -> Result<Vec<TaggedSentence>, TextError> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| TextError::Io { path: "<tagged corpus>".into(), source })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let (word, tag) = trimmed
            .split_once('\t')
            .ok_or_else(|| TextError::CorpusFormat { line: i + 1, message: "expected word<TAB>tag".into() })?;
        let tag: Tag = tag
            .parse()
            .map_err(|e: TextError| TextError::CorpusFormat { line: i + 1, message: e.to_string() })?;
        let cleaned = clean(word);
        if !cleaned.is_empty() && !cleaned.contains(' ') {
            current.push((cleaned, tag));
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

struct Averaged {
    weights: HashMap<String, [f64; N_TAGS]>,
    totals: HashMap<String, [f64; N_TAGS]>,
    stamps: HashMap<String, [u64; N_TAGS]>,
    instances: u64,
}

impl Averaged {
    fn new() -> Self {
        Averaged { weights: HashMap::new(), totals: HashMap::new(), stamps: HashMap::new(), instances: 0 }
    }

    fn bump(&mut self, feature: &str, tag: Tag, delta: f64) {
        let i = tag.index();
        let w = self.weights.entry(feature.to_string()).or_insert([0.0; N_TAGS]);
        let total = self.totals.entry(feature.to_string()).or_insert([0.0; N_TAGS]);
        let stamp = self.stamps.entry(feature.to_string()).or_insert([0; N_TAGS]);
        total[i] += (self.instances - stamp[i]) as f64 * w[i];
        stamp[i] = self.instances;
        w[i] += delta;
    }

    fn update(&mut self, truth: Tag, guess: Tag, feats: &[String]) {
        self.instances += 1;
        if truth == guess {
            return;
        }
        for f in feats {
            self.bump(f, truth, 1.0);
            self.bump(f, guess, -1.0);
        }
    }

    fn averaged(mut self) -> HashMap<String, [f64; N_TAGS]> {
        let n = self.instances.max(1) as f64;
        let mut out = HashMap::with_capacity(self.weights.len());
        for (f, w) in self.weights.drain() {
            let total = self.totals[&f];
            let stamp = self.stamps[&f];
            let mut avg = [0.0; N_TAGS];
            for i in 0..N_TAGS {
                avg[i] = (total[i] + (self.instances - stamp[i]) as f64 * w[i]) / n;
            }
            if avg.iter().any(|v| *v != 0.0) {
                out.insert(f, avg);
            }
        }
        out
    }
}

fn accuracy(model: &TaggerModel, sentences: &[TaggedSentence]) -> (usize, f64) {
    let (mut right, mut total) = (0usize, 0usize);
    for s in sentences {
        let words: Vec<String> = s.iter().map(|(w, _)| w.clone()).collect();
        let guessed = model.tag_words(&words, Fallback::Rules).expect("fallback enabled");
        right += guessed.iter().zip(s).filter(|(g, (_, t))| *g == t).count();
        total += s.len();
    }
    (total, if total == 0 { 0.0 } else { right as f64 / total as f64 })
}

/// Trains on a seeded split of `corpus` and reports training and held-out accuracy.
pub fn train_tagger(
    corpus: &[TaggedSentence],
    config: &TaggerConfig,
) -> Result<(TaggerModel, TaggerReport), TextError> {
    if corpus.iter().all(|s| s.is_empty()) {
        return Err(TextError::EmptyCorpus);
    }
    if config.epochs == 0 {
        return Err(TextError::ZeroEpochs);
    }
    let mut rng = rng_from(config.seed);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut rng);
    let n_heldout = ((corpus.len() as f64) * config.heldout_fraction.clamp(0.0, 0.9)).floor() as usize;
    let (heldout_idx, train_idx) = order.split_at(n_heldout);
    let mut train: Vec<&TaggedSentence> = train_idx.iter().map(|&i| &corpus[i]).collect();

    let mut lexicon = builtin_lexicon();
    let mut counts: BTreeMap<&str, BTreeMap<Tag, usize>> = BTreeMap::new();
    for s in &train {
        for (w, t) in s.iter() {
            *counts.entry(w.as_str()).or_default().entry(*t).or_default() += 1;
        }
    }
    for (word, by_tag) in &counts {
        let total: usize = by_tag.values().sum();
        let (&best_tag, &best) = by_tag.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).expect("non-empty");
        if total >= config.lexicon_min_count && best as f64 / total as f64 >= config.lexicon_min_ratio {
            lexicon.insert(word.to_string(), best_tag);
        } else if lexicon.get(*word) != Some(&best_tag) {
            lexicon.remove(*word);
        }
    }

    let mut avg = Averaged::new();
    for _ in 0..config.epochs {
        train.shuffle(&mut rng);
        for s in &train {
            let words: Vec<String> = s.iter().map(|(w, _)| w.clone()).collect();
            let mut prev = None;
            for (i, (_, truth)) in s.iter().enumerate() {
                let feats = features(&words, i, prev);
                let mut scores = [0.0; N_TAGS];
                for f in &feats {
                    if let Some(w) = avg.weights.get(f) {
                        for (s, v) in scores.iter_mut().zip(w) {
                            *s += v;
                        }
                    }
                }
                let guess = argmax(&scores);
                avg.update(*truth, guess, &feats);
                prev = Some(guess);
            }
        }
    }
    let model = TaggerModel { weights: avg.averaged(), lexicon };
    let train_sentences: Vec<TaggedSentence> = train_idx.iter().map(|&i| corpus[i].clone()).collect();
    let heldout: Vec<TaggedSentence> = heldout_idx.iter().map(|&i| corpus[i].clone()).collect();
    let (train_tokens, train_accuracy) = accuracy(&model, &train_sentences);
    let (heldout_tokens, heldout_acc) = accuracy(&model, &heldout);
    let report = TaggerReport {
        train_tokens,
        heldout_tokens,
        train_accuracy,
        heldout_accuracy: (heldout_tokens > 0).then_some(heldout_acc),
    };
    Ok((model, report))
}
