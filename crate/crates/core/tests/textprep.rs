use std::io::Write;

use proptest::prelude::*;
use psyprofile::bundled;
use psyprofile::textprep::{
    clean, parse_tagged_corpus, prepare_tokens, remove_stopwords, stem, tag, tokenize, train_tagger, Fallback, Stopwords,
    Tag, TaggerConfig, TaggerModel,
};

fn sample() -> Vec<Vec<(String, Tag)>> {
    parse_tagged_corpus(bundled::TAGGED_SAMPLE.as_bytes()).unwrap()
}

#[test]
fn tagger_learns_bundled_sample() {
    let (model, report) = train_tagger(&sample(), &TaggerConfig::default()).unwrap();
    let acc = report.heldout_accuracy.unwrap();
    assert!(report.heldout_tokens > 0);
    assert!(acc >= 0.85, "held-out accuracy {acc}");
    assert!(report.train_accuracy >= acc - 0.1);
    assert!(model.is_trained());
}

#[test]
fn tagger_training_is_seed_deterministic() {
    let corpus = sample();
    let (a, ra) = train_tagger(&corpus, &TaggerConfig::default()).unwrap();
    let (b, rb) = train_tagger(&corpus, &TaggerConfig::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra, rb);
}

#[test]
fn tagger_file_round_trip_tags_identically() {
    let corpus = sample();
    let (model, _) = train_tagger(&corpus, &TaggerConfig::default()).unwrap();
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(model.to_json().as_bytes()).unwrap();
    let back = TaggerModel::from_json(&std::fs::read_to_string(f.path()).unwrap()).unwrap();
    assert_eq!(back, model);
    for (i, s) in corpus.iter().enumerate().take(50) {
        let words: Vec<&str> = s.iter().map(|(w, _)| w.as_str()).collect();
        let stream = tokenize(&i.to_string(), &words.join(" "));
        assert_eq!(
            tag(&stream, &model, Fallback::Disabled).unwrap(),
            tag(&stream, &back, Fallback::Disabled).unwrap()
        );
    }
}

#[test]
fn untrained_model_needs_fallback() {
    let stream = tokenize("t", "the cats were running quickly");
    let model = TaggerModel::rule_based();
    assert!(tag(&stream, &model, Fallback::Disabled).is_err());
    let tagged = tag(&stream, &model, Fallback::Rules).unwrap();
    assert_eq!(tagged.tagged.len(), 5);
    assert_eq!(tagged.tagged[0].1, Tag::Det);
}

#[test]
fn stopwords_load_from_disk() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "# custom list\nThe\nof   # preposition\n\nrust").unwrap();
    let stop = Stopwords::load(f.path()).unwrap();
    assert_eq!(stop.len(), 3);
    assert!(stop.contains("the") && stop.contains("of") && stop.contains("rust"));
    let stream = tokenize("1", &clean("The state of Rust"));
    assert_eq!(remove_stopwords(&stream, &stop).tokens, ["state"]);
    let dir = tempfile::tempdir().unwrap();
    assert!(Stopwords::load(&dir.path().join("none.txt")).is_err());
}

#[test]
fn raw_tweet_to_stems() {
    let stop = Stopwords::default_english();
    let tokens = prepare_tokens("RT @bob: Loving the new updates!!! https://t.co/x #RustLang 2024", &stop);
    assert_eq!(tokens, ["love", "new", "updat", "rustlang"]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rule_tagger_preserves_length(words in prop::collection::vec("[a-z]{1,10}", 0..30)) {
        let stream = tokenize("p", &words.join(" "));
        let tagged = tag(&stream, &TaggerModel::rule_based(), Fallback::Rules).unwrap();
        prop_assert_eq!(tagged.tagged.len(), stream.tokens.len());
        let got: Vec<&str> = tagged.tagged.iter().map(|(w, _)| w.as_str()).collect();
        let want: Vec<&str> = stream.tokens.iter().map(String::as_str).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn stem_is_idempotent_on_short_words(w in "[a-z]{1,2}") {
        prop_assert_eq!(stem(&w), w);
    }
}
