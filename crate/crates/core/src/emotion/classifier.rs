use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::attrs::{sentiment_scores, text_emotion_freq};
use super::emoji::{emoji_emotion_freq, EmojiMap};
use super::lexicon::{expand_lexicon, AffectLexicon};
use super::svm::{logistic, train_pegasos, LinearHead, PegasosParams, SparseRow};
use super::{Emotion, EmotionError, EmotionVector};
use crate::features::{fit_tfidf, TfidfModel};
use crate::ml::train_test_split;
use crate::rng::derive_seed;
use crate::textprep::{prepare_tokens, Stopwords};

const VERSION: u32 = 1;
const DENSE: usize = 14;

/// Lexicon (synonym-expanded, stem-keyed), emoji map and stoplist used to
/// build attributes.
#[derive(Debug, Clone)]
pub struct EmotionResources {
    pub lexicon: AffectLexicon,
    pub emoji: EmojiMap,
    pub stopwords: Stopwords,
}

impl EmotionResources {
    pub fn new(lexicon: &AffectLexicon, emoji: EmojiMap, stopwords: Stopwords) -> Self {
        EmotionResources { lexicon: expand_lexicon(lexicon).stemmed(), emoji, stopwords }
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        prepare_tokens(text, &self.stopwords)
    }

    /// Text-emotion frequencies, emoji shares and the sentiment pair.
    fn dense<S: AsRef<str>>(&self, raw: &[S], tokens: &[Vec<String>]) -> [f64; DENSE] {
        let mut out = [0.0; DENSE];
        out[..6].copy_from_slice(&text_emotion_freq(tokens, &self.lexicon));
        out[6..12].copy_from_slice(&emoji_emotion_freq(raw, &self.emoji));
        let (p, n) = sentiment_scores(tokens, &self.lexicon);
        out[12] = p;
        out[13] = n;
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledText {
    pub id: String,
    pub text: String,
    pub labels: [bool; 6],
}

/// Whether a user's vector comes from one pass over pooled attributes or
/// from the share of tweets each head fires on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    User,
    Tweet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub svm: PegasosParams,
    pub test_fraction: f64,
    pub min_df: usize,
    pub seed: u64,
    pub aggregation: Aggregation,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            svm: PegasosParams::default(),
            test_fraction: 0.2,
            min_df: 2,
            seed: 0,
            aggregation: Aggregation::User,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionClassifier {
    pub version: u32,
    /// Attribute names in input order.
    pub layout: Vec<String>,
    pub tfidf: TfidfModel,
    pub dense_min: Vec<f64>,
    pub dense_max: Vec<f64>,
    /// One head per emotion, ordered as [`Emotion::ALL`].
    pub heads: Vec<LinearHead>,
    pub aggregation: Aggregation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub n_train: usize,
    pub n_test: usize,
    pub true_positives: usize,
    pub predicted_positives: usize,
    pub actual_positives: usize,
    /// Micro-averaged over the six heads; `None` when nothing was predicted positive.
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub constant_heads: Vec<Emotion>,
}

fn layout(tfidf: &TfidfModel) -> Vec<String> {
    let mut names: Vec<String> = Emotion::ALL.iter().map(|e| format!("text_{e}")).collect();
    names.extend(Emotion::ALL.iter().map(|e| format!("emoji_{e}")));
    names.push("sentiment_positive".into());
    names.push("sentiment_negative".into());
    names.extend(tfidf.vocabulary().terms().iter().map(|t| format!("tfidf_{t}")));
    names
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl EmotionClassifier {
    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    fn scale(&self, dense: &[f64; DENSE]) -> [f64; DENSE] {
        let mut out = [0.0; DENSE];
        for j in 0..DENSE {
            let (lo, hi) = (self.dense_min[j], self.dense_max[j]);
            out[j] = if hi > lo { ((dense[j] - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
        }
        out
    }

    /// Attribute vector for a group of texts (one text, or all of a user's
    /// tweets): scaled dense attributes followed by the TF-IDF row of the
    /// pooled tokens.
    pub fn attributes<S: AsRef<str>>(&self, raw: &[S], res: &EmotionResources) -> Vec<f64> {
        let tokens: Vec<Vec<String>> = raw.iter().map(|t| res.tokens(t.as_ref())).collect();
        let mut out = self.scale(&res.dense(raw, &tokens)).to_vec();
        let pooled: Vec<&String> = tokens.iter().flatten().collect();
        out.extend(self.tfidf.transform(&pooled));
        out
    }

    fn sparse<S: AsRef<str>>(&self, raw: &[S], res: &EmotionResources) -> SparseRow {
        sparse_row(&self.attributes(raw, res))
    }

    /// Emotion vector for one user under the configured aggregation.
    pub fn predict_user<S: AsRef<str>>(&self, raw_tweets: &[S], res: &EmotionResources) -> Result<EmotionVector, EmotionError> {
        match self.aggregation {
            Aggregation::User => predict_emotion_vector(&self.attributes(raw_tweets, res), self),
            Aggregation::Tweet => {
                if raw_tweets.is_empty() {
                    return Ok(EmotionVector::default());
                }
                let mut fired = [0usize; 6];
                for t in raw_tweets {
                    let row = self.sparse(std::slice::from_ref(t), res);
                    for (k, head) in self.heads.iter().enumerate() {
                        if head.margin_sparse(&row) > 0.0 {
                            fired[k] += 1;
                        }
                    }
                }
                Ok(EmotionVector(fired.map(|c| c as f64 / raw_tweets.len() as f64)))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("classifier serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, EmotionError> {
        let clf: EmotionClassifier = serde_json::from_str(text).map_err(|e| EmotionError::InvalidModel(e.to_string()))?;
        if clf.version != VERSION {
            return Err(EmotionError::InvalidModel(format!("unsupported version {}", clf.version)));
        }
        let dim = clf.layout.len();
        if clf.heads.len() != 6 || clf.heads.iter().any(|h| h.weights.len() != dim) {
            return Err(EmotionError::InvalidModel("head weights do not match the layout".into()));
        }
        if clf.dense_min.len() != DENSE || clf.dense_max.len() != DENSE || dim != DENSE + clf.tfidf.vocabulary().len() {
            return Err(EmotionError::InvalidModel("attribute bounds do not match the layout".into()));
        }
        Ok(clf)
    }
}

fn sparse_row(dense: &[f64]) -> SparseRow {
    dense.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (j as u32, v)).collect()
}

/// Logistic-squashed margin of each head.
pub fn predict_emotion_vector(attributes: &[f64], clf: &EmotionClassifier) -> Result<EmotionVector, EmotionError> {
    if attributes.len() != clf.dim() {
        return Err(EmotionError::LayoutMismatch { expected: clf.dim(), got: attributes.len() });
    }
    let mut out = [0.0; 6];
    for (o, head) in out.iter_mut().zip(&clf.heads) {
        *o = logistic(head.margin(attributes));
    }
    Ok(EmotionVector(out))
}

/// Seeded 80/20 split, TF-IDF fitted on the training texts, one head per
/// emotion, micro precision on the held-out texts.
pub fn train_emotion_classifier(
    corpus: &[LabeledText],
    res: &EmotionResources,
    config: &ClassifierConfig,
) -> Result<(EmotionClassifier, TrainingReport), EmotionError> {
    if corpus.is_empty() {
        return Err(EmotionError::EmptyCorpus);
    }
    let (train, test) = train_test_split(corpus.len(), config.test_fraction, config.seed)
        .map_err(|e| EmotionError::InvalidModel(e.to_string()))?;
    if train.is_empty() {
        return Err(EmotionError::EmptyCorpus);
    }
    let tokens: Vec<Vec<String>> = corpus.iter().map(|c| res.tokens(&c.text)).collect();
    let train_docs: Vec<&Vec<String>> = train.iter().map(|&i| &tokens[i]).collect();
    let tfidf = fit_tfidf(&train_docs.iter().map(|d| d.as_slice()).map(<[String]>::to_vec).collect::<Vec<_>>(), config.min_df)?;
    let dense: Vec<[f64; DENSE]> =
        corpus.iter().zip(&tokens).map(|(c, t)| res.dense(&[c.text.as_str()], std::slice::from_ref(t))).collect();
    let mut dense_min = vec![f64::INFINITY; DENSE];
    let mut dense_max = vec![f64::NEG_INFINITY; DENSE];
    for &i in &train {
        for j in 0..DENSE {
            dense_min[j] = dense_min[j].min(dense[i][j]);
            dense_max[j] = dense_max[j].max(dense[i][j]);
        }
    }
    let mut clf = EmotionClassifier {
        version: VERSION,
        layout: layout(&tfidf),
        tfidf,
        dense_min,
        dense_max,
        heads: Vec::new(),
        aggregation: config.aggregation,
    };
    let rows: Vec<SparseRow> = corpus
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let mut r = clf.scale(&dense[i]).to_vec();
            r.extend(clf.tfidf.transform(&tokens[i]));
            sparse_row(&r)
        })
        .collect();
    let train_rows: Vec<SparseRow> = train.iter().map(|&i| rows[i].clone()).collect();
    let mut constant_heads = Vec::new();
    for e in Emotion::ALL {
        let labels: Vec<bool> = train.iter().map(|&i| corpus[i].labels[e.index()]).collect();
        if !labels.iter().any(|&l| l) {
            log::warn!("no positive training example for {e}; head is constant negative");
            constant_heads.push(e);
        }
        clf.heads.push(train_pegasos(&train_rows, &labels, clf.dim(), &config.svm, derive_seed(config.seed, e.index() as u64)));
    }
    let (mut tp, mut pp, mut ap) = (0, 0, 0);
    for &i in &test {
        for e in Emotion::ALL {
            let predicted = clf.heads[e.index()].margin_sparse(&rows[i]) > 0.0;
            let actual = corpus[i].labels[e.index()];
            pp += usize::from(predicted);
            ap += usize::from(actual);
            tp += usize::from(predicted && actual);
        }
    }
    let report = TrainingReport {
        n_train: train.len(),
        n_test: test.len(),
        true_positives: tp,
        predicted_positives: pp,
        actual_positives: ap,
        precision: ratio(tp, pp),
        recall: ratio(tp, ap),
        constant_heads,
    };
    Ok((clf, report))
}

fn parse_flags(field: &str, line: usize) -> Result<[bool; 6], EmotionError> {
    let parts: Vec<&str> = field.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(EmotionError::Format { line, message: format!("expected 6 comma-separated flags, got {}", parts.len()) });
    }
    let mut out = [false; 6];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = match p {
            "1" => true,
            "0" => false,
            other => return Err(EmotionError::Format { line, message: format!("flag `{other}` is not 0 or 1") }),
        };
    }
    Ok(out)
}

/// `id<TAB>text<TAB>joy,sadness,anger,disgust,fear,surprise` with 0/1 flags.
/// A first line starting with `id` is taken as a header.
pub fn parse_emotion_corpus<R: BufRead>(reader: R) -> Result<Vec<LabeledText>, EmotionError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| EmotionError::Io { path: "<emotion corpus>".into(), source })?;
        if line.trim().is_empty() || (i == 0 && line.to_ascii_lowercase().starts_with("id\t")) {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let [id, text, flags] = cols.as_slice() else {
            return Err(EmotionError::Format { line: i + 1, message: format!("expected 3 columns, got {}", cols.len()) });
        };
        out.push(LabeledText { id: id.to_string(), text: text.to_string(), labels: parse_flags(flags, i + 1)? });
    }
    Ok(out)
}

/// SemEval-2018 E-c layout: a header naming `ID`, `Tweet` and one 0/1 column
/// per emotion. Only the six emotions used here are kept; the rest are ignored.
pub fn parse_semeval_ec<R: BufRead>(reader: R) -> Result<Vec<LabeledText>, EmotionError> {
    let mut lines = reader.lines();
    let io = |source| EmotionError::Io { path: "<semeval corpus>".into(), source };
    let header = lines.next().ok_or(EmotionError::EmptyCorpus)?.map_err(io)?;
    let names: Vec<String> = header.split('\t').map(|h| h.trim().to_ascii_lowercase()).collect();
    let find = |name: &str| {
        names.iter().position(|h| h == name).ok_or_else(|| EmotionError::Format { line: 1, message: format!("missing column `{name}`") })
    };
    let id_col = find("id")?;
    let text_col = find("tweet")?;
    let emo_cols = Emotion::ALL.iter().map(|e| find(e.name())).collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != names.len() {
            return Err(EmotionError::Format { line: i + 2, message: format!("expected {} columns", names.len()) });
        }
        let flags: Vec<&str> = emo_cols.iter().map(|&c| cols[c].trim()).collect();
        out.push(LabeledText {
            id: cols[id_col].to_string(),
            text: cols[text_col].to_string(),
            labels: parse_flags(&flags.join(","), i + 2)?,
        });
    }
    Ok(out)
}
