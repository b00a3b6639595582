//! Vocabulary-based language features: TF-IDF over words, word n-gram
//! counts and POS-tag n-gram frequencies.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::FeatureError;
use crate::textprep::Tag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VocabKind {
    Word,
    Bigram,
    Trigram,
    Pos1,
    Pos2,
    Pos3,
}

/// Sorted unique terms with their document frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    kind: VocabKind,
    terms: Vec<String>,
    df: Vec<usize>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyData {
    kind: VocabKind,
    terms: Vec<String>,
    df: Vec<usize>,
}

impl From<VocabularyData> for Vocabulary {
    fn from(d: VocabularyData) -> Self {
        Vocabulary::from_parts(d.kind, d.terms, d.df)
    }
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        VocabularyData { kind: v.kind, terms: v.terms, df: v.df }
    }
}

impl Vocabulary {
    fn from_parts(kind: VocabKind, terms: Vec<String>, df: Vec<usize>) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { kind, terms, df, index }
    }

    /// Keeps terms whose document frequency is at least `min_df`.
    fn fit<'a, I>(kind: VocabKind, docs: I, min_df: usize) -> Self
    where
        I: IntoIterator<Item = BTreeSet<&'a str>>,
    {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            for term in doc {
                *df.entry(term).or_default() += 1;
            }
        }
        let (terms, counts) = df.into_iter().filter(|(_, c)| *c >= min_df).map(|(t, c)| (t.to_string(), c)).unzip();
        Vocabulary::from_parts(kind, terms, counts)
    }

    pub fn kind(&self) -> VocabKind {
        self.kind
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn document_frequencies(&self) -> &[usize] {
        &self.df
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

fn check(n_docs: usize, min_df: usize) -> Result<(), FeatureError> {
    if n_docs == 0 {
        return Err(FeatureError::EmptyCorpus);
    }
    if min_df == 0 {
        return Err(FeatureError::InvalidMinDf);
    }
    Ok(())
}

/// Smoothed TF-IDF with raw term counts and L2-normalized rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    vocab: Vocabulary,
    idf: Vec<f64>,
    n_docs: usize,
}

/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`.
pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Fits the vocabulary and idf weights on one token document per user.
pub fn fit_tfidf<S: AsRef<str>>(docs: &[Vec<S>], min_df: usize) -> Result<TfidfModel, FeatureError> {
    check(docs.len(), min_df)?;
    let vocab = Vocabulary::fit(
        VocabKind::Word,
        docs.iter().map(|d| d.iter().map(AsRef::as_ref).collect::<BTreeSet<&str>>()),
        min_df,
    );
    let idf = vocab.df.iter().map(|&df| smoothed_idf(docs.len(), df)).collect();
    Ok(TfidfModel { vocab, idf, n_docs: docs.len() })
}

impl TfidfModel {
    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// Un-normalized `tf · idf` row. Out-of-vocabulary tokens are ignored.
    pub fn raw_row<S: AsRef<str>>(&self, doc: &[S]) -> Vec<f64> {
        let mut row = vec![0.0; self.vocab.len()];
        for token in doc {
            if let Some(i) = self.vocab.get(token.as_ref()) {
                row[i] += 1.0;
            }
        }
        for (v, idf) in row.iter_mut().zip(&self.idf) {
            *v *= idf;
        }
        row
    }

    /// L2-normalized row; all-zero when no token is in the vocabulary.
    pub fn transform<S: AsRef<str>>(&self, doc: &[S]) -> Vec<f64> {
        let mut row = self.raw_row(doc);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut row {
                *v /= norm;
            }
        }
        row
    }

    /// Non-zero entries of [`TfidfModel::transform`], by column index.
    pub fn transform_sparse<S: AsRef<str>>(&self, doc: &[S]) -> Vec<(u32, f64)> {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for token in doc {
            if let Some(i) = self.vocab.get(token.as_ref()) {
                *counts.entry(i).or_default() += 1.0;
            }
        }
        let mut row: Vec<(u32, f64)> = counts.into_iter().map(|(i, c)| (i as u32, c * self.idf[i])).collect();
        let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut row {
                *v /= norm;
            }
        }
        row
    }
}

/// Contiguous n-grams of one tweet, joined by single spaces.
pub fn ngrams<S: AsRef<str>>(tokens: &[S], n: usize) -> impl Iterator<Item = String> + '_ {
    tokens.windows(n.max(1)).filter(move |_| n > 0).map(|w| {
        let mut s = String::new();
        for (i, t) in w.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(t.as_ref());
        }
        s
    })
}

/// Frozen n-gram vocabularies, one per order, applied to per-tweet token
/// sequences so that no n-gram spans two tweets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceModel {
    orders: Vec<usize>,
    vocabs: Vec<Vocabulary>,
    /// Divide counts by the user's total token count.
    relative: bool,
}

fn fit_sequences(
    docs: &[Vec<Vec<String>>],
    orders: &[(usize, VocabKind)],
    min_df: usize,
    relative: bool,
) -> Result<SequenceModel, FeatureError> {
    check(docs.len(), min_df)?;
    let mut vocabs = Vec::with_capacity(orders.len());
    for &(n, kind) in orders {
        let per_doc: Vec<BTreeSet<String>> =
            docs.iter().map(|tweets| tweets.iter().flat_map(|t| ngrams(t, n)).collect()).collect();
        vocabs.push(Vocabulary::fit(kind, per_doc.iter().map(|s| s.iter().map(String::as_str).collect()), min_df));
    }
    Ok(SequenceModel { orders: orders.iter().map(|o| o.0).collect(), vocabs, relative })
}

impl SequenceModel {
    pub fn vocabularies(&self) -> &[Vocabulary] {
        &self.vocabs
    }

    pub fn len(&self) -> usize {
        self.vocabs.iter().map(Vocabulary::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Column names in output order: each vocabulary's terms, lower orders first.
    pub fn column_names(&self) -> Vec<String> {
        self.vocabs.iter().flat_map(|v| v.terms.iter().cloned()).collect()
    }

    pub fn transform(&self, tweets: &[Vec<String>]) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.len());
        for (&n, vocab) in self.orders.iter().zip(&self.vocabs) {
            let mut block = vec![0.0; vocab.len()];
            for t in tweets {
                for g in ngrams(t, n) {
                    if let Some(i) = vocab.get(&g) {
                        block[i] += 1.0;
                    }
                }
            }
            row.extend(block);
        }
        if self.relative {
            let total: usize = tweets.iter().map(Vec::len).sum();
            for v in &mut row {
                *v = if total == 0 { 0.0 } else { *v / total as f64 };
            }
        }
        row
    }

    /// Non-zero entries of [`SequenceModel::transform`], by column index.
    pub fn transform_sparse(&self, tweets: &[Vec<String>]) -> Vec<(u32, f64)> {
        let mut row = Vec::new();
        let mut offset = 0;
        for (&n, vocab) in self.orders.iter().zip(&self.vocabs) {
            let mut block: BTreeMap<usize, f64> = BTreeMap::new();
            for t in tweets {
                for g in ngrams(t, n) {
                    if let Some(i) = vocab.get(&g) {
                        *block.entry(i).or_default() += 1.0;
                    }
                }
            }
            row.extend(block.into_iter().map(|(i, c)| ((offset + i) as u32, c)));
            offset += vocab.len();
        }
        if self.relative {
            let total: usize = tweets.iter().map(Vec::len).sum();
            for (_, v) in &mut row {
                *v /= total as f64;
            }
        }
        row
    }
}

/// Word bigram and trigram raw counts.
pub fn fit_ngrams(docs: &[Vec<Vec<String>>], min_df: usize) -> Result<SequenceModel, FeatureError> {
    fit_sequences(docs, &[(2, VocabKind::Bigram), (3, VocabKind::Trigram)], min_df, false)
}

pub fn tag_sequences(tagged: &[Vec<Tag>]) -> Vec<Vec<String>> {
    tagged.iter().map(|t| t.iter().map(|tag| tag.as_str().to_string()).collect()).collect()
}

/// Tag unigram, bigram and trigram counts divided by the user's token count.
/// `docs` holds each user's tweets as tag-name sequences (see [`tag_sequences`]).
pub fn fit_pos_ngrams(docs: &[Vec<Vec<String>>], min_df: usize) -> Result<SequenceModel, FeatureError> {
    fit_sequences(docs, &[(1, VocabKind::Pos1), (2, VocabKind::Pos2), (3, VocabKind::Pos3)], min_df, true)
}
