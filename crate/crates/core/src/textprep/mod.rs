//! Tweet text preparation.

mod stem;
mod stopwords;
mod tagger;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use stem::{porter_step, stem};
pub use stopwords::Stopwords;
pub use tagger::{
    parse_tagged_corpus, tag, train_tagger, Fallback, Tag, TaggedSentence, TaggedStream, TaggerConfig, TaggerModel,
    TaggerReport,
};

#[derive(Debug, Error)]
pub enum TextError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("tagged corpus line {line}: {message}")]
    CorpusFormat { line: usize, message: String },
    #[error("tagged corpus is empty")]
    EmptyCorpus,
    #[error("epochs must be at least 1")]
    ZeroEpochs,
    #[error("tagger model is untrained and rule fallback is disabled")]
    Untrained,
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
    #[error("invalid tagger model: {0}")]
    InvalidModel(String),
}

/// Lowercase word tokens of one tweet.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenStream {
    pub tweet_id: String,
    pub tokens: Vec<String>,
}

/// Tokens starting with a URL scheme, `www.` or the `t.co/` shortener.
pub fn is_url(token: &str) -> bool {
    let lower = token.to_ascii_lowercase();
    ["http://", "https://", "www.", "t.co/"].iter().any(|p| lower.starts_with(p))
}

/// Strips a leading `RT`, URLs and `@`-mentions, then every character that is
/// not an ASCII letter (the `#` of a hashtag goes, its word stays), lowercases
/// and collapses whitespace.
pub fn clean(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, token) in text.split_whitespace().enumerate() {
        if (i == 0 && token == "RT") || token.starts_with('@') || is_url(token) {
            continue;
        }
        let word: String = token.chars().filter(char::is_ascii_alphabetic).map(|c| c.to_ascii_lowercase()).collect();
        if word.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&word);
    }
    out
}

pub fn tokenize(tweet_id: &str, cleaned: &str) -> TokenStream {
    TokenStream {
        tweet_id: tweet_id.to_string(),
        tokens: cleaned.split_whitespace().map(str::to_string).collect(),
    }
}

pub fn remove_stopwords(stream: &TokenStream, stoplist: &Stopwords) -> TokenStream {
    TokenStream {
        tweet_id: stream.tweet_id.clone(),
        tokens: stream.tokens.iter().filter(|t| !stoplist.contains(t)).cloned().collect(),
    }
}

/// Cleaned, stopword-filtered, stemmed tokens of one text.
pub fn prepare_tokens(text: &str, stoplist: &Stopwords) -> Vec<String> {
    clean(text).split_whitespace().filter(|t| !stoplist.contains(t)).map(stem).collect()
}
