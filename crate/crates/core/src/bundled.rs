//! Small sample resources shipped with the crate, enough to run the whole
//! pipeline without external downloads.

use crate::corpus::QuestionnaireKey;
use crate::emotion::{
    parse_emotion_corpus, train_emotion_classifier, AffectLexicon, ClassifierConfig, EmojiMap, EmotionClassifier,
    EmotionResources, LabeledText, TrainingReport,
};
use crate::pipeline::Preprocessor;
use crate::textprep::{Fallback, Stopwords, TaggerModel};

pub const AFFECT_LEXICON: &str = include_str!("../data/affect_lexicon.tsv");
pub const EMOJI_MAP: &str = include_str!("../data/emoji_map.tsv");
/// Multi-label emotion corpus whose labels are separable by lexicon words.
pub const EMOTION_CORPUS: &str = include_str!("../data/emotion_corpus.tsv");
pub const TAGGED_SAMPLE: &str = include_str!("../data/tagged_sample.tsv");
pub const QUESTIONNAIRE_KEY: &str = include_str!("../data/questionnaire_key.csv");

pub fn lexicon() -> AffectLexicon {
    AffectLexicon::parse(AFFECT_LEXICON.as_bytes()).expect("in-memory read").0
}

pub fn emoji_map() -> EmojiMap {
    EmojiMap::parse(EMOJI_MAP.as_bytes()).expect("in-memory read").0
}

pub fn emotion_corpus() -> Vec<LabeledText> {
    parse_emotion_corpus(EMOTION_CORPUS.as_bytes()).expect("bundled corpus parses")
}

pub fn questionnaire_key() -> QuestionnaireKey {
    QuestionnaireKey::from_csv_reader(QUESTIONNAIRE_KEY.as_bytes()).expect("bundled key parses")
}

pub fn resources() -> EmotionResources {
    EmotionResources::new(&lexicon(), emoji_map(), Stopwords::default_english())
}

pub fn emotion_classifier(seed: u64) -> (EmotionClassifier, TrainingReport) {
    let config = ClassifierConfig { seed, ..ClassifierConfig::default() };
    train_emotion_classifier(&emotion_corpus(), &resources(), &config).expect("bundled corpus trains")
}

/// Rule-based tagger, English stopwords and the bundled emotion classifier.
pub fn preprocessor(seed: u64) -> Preprocessor {
    Preprocessor {
        stopwords: Stopwords::default_english(),
        tagger: TaggerModel::rule_based(),
        fallback: Fallback::Rules,
        emotion: emotion_classifier(seed).0,
        resources: resources(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::parse_tagged_corpus;

    #[test]
    fn resources_parse_cleanly() {
        let (_, diags) = AffectLexicon::parse(AFFECT_LEXICON.as_bytes()).unwrap();
        assert!(diags.is_empty(), "{diags:?}");
        let (emoji, diags) = EmojiMap::parse(EMOJI_MAP.as_bytes()).unwrap();
        assert!(diags.is_empty() && !emoji.is_empty());
        assert_eq!(emotion_corpus().len(), 240);
        assert!(parse_tagged_corpus(TAGGED_SAMPLE.as_bytes()).unwrap().len() >= 100);
        assert!(questionnaire_key().items().count() > 0);
    }

    #[test]
    fn bundled_classifier_is_exact() {
        let (_, report) = emotion_classifier(0);
        assert_eq!(report.precision, Some(1.0));
    }
}
