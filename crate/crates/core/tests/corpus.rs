use std::collections::BTreeMap;
use std::io::Write;

use proptest::prelude::*;
use psyprofile::bundled;
use psyprofile::corpus::{filter_spam, load_users, write_removal_report, write_users, LoadOptions, PsychTrait, QuestionnaireKey, RemovalRule, SpamPolicy};
use psyprofile::synth::{generate, SynthSpec};

/// (item, trait, reversed, scale_max) read straight from the key file text.
fn key_rows() -> Vec<(String, String, bool, i64)> {
    bundled::QUESTIONNAIRE_KEY
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].to_string(), f[2] == "true", f[3].parse().unwrap())
        })
        .collect()
}

fn user_line(handle: &str, extra: &str) -> String {
    format!(
        r#"{{"handle":"{handle}","statuses_count":40,"followers_count":9,"listed_count":0,"favourites_count":3,"account_created":"2015-01-01T00:00:00Z","tweets":[{{"id":"1","text":"hello world","created_at":"2015-01-11T00:00:00Z"}}]{extra}}}"#
    )
}

fn write_file(lines: &[String]) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    for l in lines {
        writeln!(f, "{l}").unwrap();
    }
    f.flush().unwrap();
    f
}

fn key_options() -> LoadOptions {
    LoadOptions { key: Some(bundled::questionnaire_key()), as_of: None }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn responses_on_disk_score_like_hand_computation(seed in prop::collection::vec(0u8..=255, 24)) {
        let rows = key_rows();
        let mut responses = BTreeMap::new();
        let mut sums: BTreeMap<String, (f64, f64, i64)> = BTreeMap::new();
        for (i, (item, t, reversed, max)) in rows.iter().enumerate() {
            let r = 1 + i64::from(seed[i % seed.len()]) % max;
            responses.insert(item.clone(), r);
            let scored = if *reversed { max + 1 - r } else { r };
            let e = sums.entry(t.clone()).or_insert((0.0, 0.0, *max));
            e.0 += scored as f64;
            e.1 += 1.0;
        }
        let extra = format!(r#","responses":{}"#, serde_json::to_string(&responses).unwrap());
        let file = write_file(&[user_line("u1", &extra)]);
        let out = load_users(file.path(), &key_options()).unwrap();
        prop_assert!(out.diagnostics.is_empty());
        let label = out.users[0].label.unwrap();
        for t in PsychTrait::ALL {
            let (s, n, max) = sums[t.name()];
            let expected = (s / n - 1.0) / (max as f64 - 1.0);
            prop_assert!((label.get(t) - expected).abs() < 1e-12, "{t}: {} vs {expected}", label.get(t));
        }
    }
}

#[test]
fn key_loads_from_disk_like_bundled() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(bundled::QUESTIONNAIRE_KEY.as_bytes()).unwrap();
    let key = QuestionnaireKey::load(f.path()).unwrap();
    assert_eq!(key.items().count(), key_rows().len());
    assert_eq!(key, bundled::questionnaire_key());
}

#[test]
fn malformed_lines_rejected_with_line_numbers() {
    let lines = vec![
        user_line("good", ""),
        "{not json".to_string(),
        String::new(),
        r#"{"handle":"partial","statuses_count":3}"#.to_string(),
        user_line("raw", r#","raw_traits":{"anxiety":4,"avoidance":4,"openness":3,"conscientiousness":3.69,"extraversion":3,"agreeableness":3,"neuroticism":3}"#),
    ];
    let file = write_file(&lines);
    let out = load_users(file.path(), &LoadOptions::default()).unwrap();
    let handles: Vec<&str> = out.users.iter().map(|u| u.profile.handle.as_str()).collect();
    assert_eq!(handles, ["good", "raw"]);
    let rejected: Vec<usize> = out.diagnostics.iter().filter(|d| d.rejected).map(|d| d.line).collect();
    assert_eq!(rejected, [2, 4]);
    let label = out.users[1].label.unwrap();
    assert!((label.get(PsychTrait::Conscientiousness) - 0.6725).abs() < 1e-12);
    assert!((label.get(PsychTrait::Anxiety) - 0.5).abs() < 1e-12);
    assert!(out.users[0].label.is_none());
    assert_eq!(out.users[0].profile.account_age_days, 10);
}

#[test]
fn responses_without_key_warn_and_keep_user() {
    let extra = r#","responses":{"anx1":3}"#;
    let file = write_file(&[user_line("u", extra)]);
    let out = load_users(file.path(), &LoadOptions::default()).unwrap();
    assert_eq!(out.users.len(), 1);
    assert!(out.users[0].label.is_none());
    assert_eq!(out.diagnostics.len(), 1);
    assert!(!out.diagnostics[0].rejected);
}

#[test]
fn out_of_scale_response_rejects_user() {
    let file = write_file(&[user_line("u", r#","responses":{"anx1":8}"#)]);
    let out = load_users(file.path(), &key_options()).unwrap();
    assert!(out.users.is_empty());
    assert!(out.diagnostics[0].rejected);
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(load_users(&dir.path().join("absent.jsonl"), &LoadOptions::default()).is_err());
}

#[test]
fn synthetic_corpus_round_trips_through_disk_in_order() {
    let mut spec = SynthSpec::bundled_default();
    spec.n_users = 40;
    let users = generate(&spec).unwrap();
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write_users(&mut f, &users).unwrap();
    let out = load_users(f.path(), &LoadOptions::default()).unwrap();
    assert!(out.diagnostics.is_empty());
    assert_eq!(out.users, users);
}

#[test]
fn spam_filter_on_loaded_users() {
    let spam_tweets: Vec<String> = (0..4)
        .map(|i| format!(r##"{{"id":"s{i}","text":"win a prize now #a #b #c #d #e","created_at":"2015-02-0{}T00:00:00Z"}}"##, i + 1))
        .collect();
    let spammer = format!(
        r#"{{"handle":"spammer","statuses_count":400,"followers_count":50,"listed_count":0,"favourites_count":0,"account_created":"2014-01-01T00:00:00Z","tweets":[{}]}}"#,
        spam_tweets.join(",")
    );
    let ghost = user_line("ghost", "").replace(r#""followers_count":9"#, r#""followers_count":1"#);
    let mixed = user_line("mixed", "").replace(
        r#""tweets":["#,
        r##""tweets":[{"id":"h1","text":"#x #y #z #w #v promo","created_at":"2015-01-05T00:00:00Z"},"##,
    );
    let file = write_file(&[user_line("plain", ""), spammer, ghost, mixed]);
    let users = load_users(file.path(), &LoadOptions::default()).unwrap().users;
    assert_eq!(users.len(), 4);

    let policy = SpamPolicy::default();
    let (kept, removals) = filter_spam(&users, &policy);
    let kept_handles: Vec<&str> = kept.iter().map(|u| u.profile.handle.as_str()).collect();
    assert_eq!(kept_handles, ["plain", "mixed"]);
    assert_eq!(kept[1].tweets.len(), 1);
    let rules: Vec<(&str, RemovalRule)> = removals.iter().map(|r| (r.handle.as_str(), r.rule)).collect();
    assert_eq!(
        rules,
        [("spammer", RemovalRule::RepetitiveSpamUser), ("ghost", RemovalRule::GhostFewFollowers), ("mixed", RemovalRule::SpamTweet)]
    );

    let (again, none) = filter_spam(&kept, &policy);
    assert_eq!(again, kept);
    assert!(none.is_empty());

    let mut csv_out = Vec::new();
    write_removal_report(&mut csv_out, &removals).unwrap();
    let text = String::from_utf8(csv_out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("handle,rule,detail"));
    assert_eq!(lines.count(), 3);
    assert!(text.contains("spammer,repetitive_spam_user,near_duplicate_tweets=4"));
}
