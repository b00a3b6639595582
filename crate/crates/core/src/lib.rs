//! Holistic psychological profiling of social-media users.
//!
//! The crate predicts seven trait scores in `[0, 1]` (two attachment
//! orientations and the Big Five) from archived posts and profile metadata.
//! It is organised bottom-up:
//!
//! * [`corpus`]: data model, JSONL ingestion, questionnaire scoring, spam and ghost filtering.
//! * [`textprep`]: cleaning, tokenization, stopwords, stemming and an averaged-perceptron POS tagger.
//! * [`features`]: behavioral attributes, TF-IDF, word and POS n-grams, min-max scaling, top-k selection.
//! * [`emotion`]: affect lexicon, emoji map, sentiment and the six-head linear SVM emotion detector.
//! * [`ml`]: CART trees, random forests, regressor chains and the chain ensemble.
//! * [`analysis`]: trait statistics, Pearson correlation with p-values, group comparison, t-SNE.
//! * [`synth`]: seeded synthetic corpora with planted signals.
//! * [`pipeline`]: glue that turns users into routed feature matrices and evaluation reports.

pub mod analysis;
pub mod bundled;
pub mod corpus;
pub mod emotion;
pub mod features;
pub mod ml;
pub mod pipeline;
pub mod rng;
pub mod synth;
pub mod textprep;

pub use corpus::{PsychTrait, TraitProfile, Tweet, UserProfile, UserRecord};
