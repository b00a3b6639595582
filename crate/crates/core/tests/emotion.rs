use std::io::Write;

use psyprofile::bundled;
use psyprofile::emotion::{
    parse_emotion_corpus, parse_semeval_ec, text_emotion_freq, train_emotion_classifier, AffectLexicon, Aggregation,
    ClassifierConfig, EmojiMap, Emotion, EmotionClassifier, EmotionResources,
};
use psyprofile::textprep::Stopwords;

fn file_with(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f.flush().unwrap();
    f
}

fn disk_resources() -> EmotionResources {
    let lex = file_with(bundled::AFFECT_LEXICON);
    let emoji = file_with(bundled::EMOJI_MAP);
    let (lexicon, d1) = AffectLexicon::load(lex.path()).unwrap();
    let (emoji, d2) = EmojiMap::load(emoji.path()).unwrap();
    assert!(d1.is_empty() && d2.is_empty());
    EmotionResources::new(&lexicon, emoji, Stopwords::default_english())
}

#[test]
fn resources_from_disk_train_the_bundled_classifier() {
    let config = ClassifierConfig { seed: 3, ..ClassifierConfig::default() };
    let (clf, report) = train_emotion_classifier(&bundled::emotion_corpus(), &disk_resources(), &config).unwrap();
    let (bundled_clf, bundled_report) = bundled::emotion_classifier(3);
    assert_eq!(clf.to_json(), bundled_clf.to_json());
    assert_eq!(report, bundled_report);
    assert_eq!(report.precision, Some(1.0));
}

#[test]
fn lexicon_file_diagnostics_name_lines() {
    let f = file_with("# header\ngrief\tsadness\t0.8\nglad\tjoy\t1.5\nodd\tbliss\t0.4\n\nwow\t0.6\t0.1\nonly-one-column\n");
    let (lex, diags) = AffectLexicon::load(f.path()).unwrap();
    let lines: Vec<usize> = diags.iter().map(|d| d.line).collect();
    assert_eq!(lines, [3, 4, 7]);
    assert_eq!(lex.strength("grief", Emotion::Sadness), Some(0.8));
    assert_eq!(lex.sentiment("wow"), Some((0.6, 0.1)));
    let freq = text_emotion_freq(&[vec!["grief", "cat"]], &lex);
    assert_eq!(freq, [0.0, 0.4, 0.0, 0.0, 0.0, 0.0]);
    let dir = tempfile::tempdir().unwrap();
    assert!(AffectLexicon::load(&dir.path().join("missing.tsv")).is_err());
}

#[test]
fn user_vectors_follow_lexicon_emotion() {
    let (clf, _) = bundled::emotion_classifier(7);
    let res = bundled::resources();
    let sad = ["feeling lonely and heartbroken tonight", "so gloomy and miserable", "tearful again, hopeless week"];
    let glad = ["delighted and cheerful today", "thrilled with the concert", "what a merry and joyful weekend"];
    let vs = clf.predict_user(&sad, &res).unwrap();
    let vg = clf.predict_user(&glad, &res).unwrap();
    for v in [vs, vg] {
        assert!(v.0.iter().all(|x| (0.0..=1.0).contains(x)), "{v:?}");
    }
    assert!(vs.get(Emotion::Sadness) > vs.get(Emotion::Joy));
    assert!(vg.get(Emotion::Joy) > vg.get(Emotion::Sadness));
    assert!(vs.get(Emotion::Sadness) > vg.get(Emotion::Sadness));
}

#[test]
fn tweet_aggregation_counts_firing_shares() {
    let (mut clf, _) = bundled::emotion_classifier(7);
    clf.aggregation = Aggregation::Tweet;
    let res = bundled::resources();
    let tweets = ["lonely and heartbroken", "delighted and cheerful", "gloomy and miserable", "table chair window"];
    let v = clf.predict_user(&tweets, &res).unwrap();
    for x in v.0 {
        assert_eq!((x * 4.0).fract(), 0.0, "{x}");
    }
    assert!(v.get(Emotion::Sadness) >= 0.5);
    assert_eq!(clf.predict_user::<&str>(&[], &res).unwrap().0, [0.0; 6]);
}

#[test]
fn semeval_layout_matches_native_layout() {
    let native = bundled::emotion_corpus();
    let mut text = String::from("ID\tTweet\tanger\tanticipation\tdisgust\tfear\tjoy\tlove\toptimism\tpessimism\tsadness\tsurprise\ttrust\n");
    for item in &native {
        let f = |e: Emotion| if item.labels[e.index()] { "1" } else { "0" };
        text.push_str(&format!(
            "{}\t{}\t{}\t0\t{}\t{}\t{}\t1\t0\t0\t{}\t{}\t0\n",
            item.id,
            item.text,
            f(Emotion::Anger),
            f(Emotion::Disgust),
            f(Emotion::Fear),
            f(Emotion::Joy),
            f(Emotion::Sadness),
            f(Emotion::Surprise)
        ));
    }
    let semeval = parse_semeval_ec(file_with(&text).reopen().map(std::io::BufReader::new).unwrap()).unwrap();
    assert_eq!(semeval, native);

    let mut native_text = String::from("id\ttext\tlabels\n");
    for item in &native {
        let flags: Vec<&str> = item.labels.iter().map(|b| if *b { "1" } else { "0" }).collect();
        native_text.push_str(&format!("{}\t{}\t{}\n", item.id, item.text, flags.join(",")));
    }
    assert_eq!(parse_emotion_corpus(native_text.as_bytes()).unwrap(), native);
}

#[test]
fn semeval_missing_column_is_reported() {
    let err = parse_semeval_ec("ID\tTweet\tanger\tjoy\n1\thi\t0\t1\n".as_bytes()).unwrap_err();
    assert!(err.to_string().contains("sadness") || err.to_string().contains("disgust"), "{err}");
}

#[test]
fn classifier_file_round_trip() {
    let (clf, _) = bundled::emotion_classifier(2);
    let f = file_with(&clf.to_json());
    let back = EmotionClassifier::from_json(&std::fs::read_to_string(f.path()).unwrap()).unwrap();
    let res = bundled::resources();
    let texts = ["thrilled but also lonely", "nothing in particular"];
    assert_eq!(back.predict_user(&texts, &res).unwrap(), clf.predict_user(&texts, &res).unwrap());

    let mut broken = clf.clone();
    broken.layout.pop();
    assert!(EmotionClassifier::from_json(&broken.to_json()).is_err());
}
