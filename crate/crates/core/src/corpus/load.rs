use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::questionnaire::{normalize_traits, score_questionnaire, QuestionnaireKey, RawTraits};
use super::{CorpusError, PsychTrait, TraitProfile, Tweet, UserProfile, UserRecord};

/// Tweet ids arrive as strings or numbers depending on the exporter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum TweetId {
    Text(String),
    Number(u64),
}

impl TweetId {
    fn into_string(self) -> String {
        match self {
            TweetId::Text(s) => s,
            TweetId::Number(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTweet {
    id: TweetId,
    pub text: String,
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub is_retweet: bool,
}

/// One line of the users JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawUser {
    pub handle: String,
    pub statuses_count: u64,
    pub followers_count: u64,
    pub listed_count: u64,
    pub favourites_count: u64,
    #[serde(default)]
    pub bio: String,
    pub account_created: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub account_age_days: Option<u64>,
    #[serde(default)]
    pub tweets: Vec<RawTweet>,
    /// Normalized scores in `[0, 1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traits: Option<TraitProfile>,
    /// Scores on the instrument scale.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_traits: Option<BTreeMap<String, f64>>,
    /// Item responses, scored with the questionnaire key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub responses: Option<BTreeMap<String, i64>>,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub key: Option<QuestionnaireKey>,
    /// Reference instant for account age. Defaults to the user's latest tweet.
    pub as_of: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
    /// Whether the line was dropped.
    pub rejected: bool,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOutcome {
    pub users: Vec<UserRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

fn age_days(created: DateTime<Utc>, as_of: DateTime<Utc>) -> u64 {
    let days = (as_of - created).num_days();
    days.max(1) as u64
}

impl RawUser {
    /// Converts to a record; the `Err` side is a human-readable rejection reason,
    /// and the optional string is a non-fatal warning.
    fn into_record(self, opts: &LoadOptions) -> Result<(UserRecord, Option<String>), String> {
        let mut warning = None;
        let label = if let Some(p) = self.traits {
            Some(p)
        } else if let Some(raw) = self.raw_traits {
            let mut parsed = RawTraits::new();
            for (k, v) in raw {
                let t: PsychTrait = k.parse().map_err(|e: CorpusError| e.to_string())?;
                parsed.insert(t, v);
            }
            Some(normalize_traits(&parsed).map_err(|e| e.to_string())?)
        } else if let Some(responses) = self.responses {
            match &opts.key {
                Some(key) => {
                    let raw = score_questionnaire(&responses, key).map_err(|e| e.to_string())?;
                    Some(normalize_traits(&raw).map_err(|e| e.to_string())?)
                }
                None => {
                    warning = Some("responses present but no questionnaire key configured; label dropped".to_string());
                    None
                }
            }
        } else {
            None
        };

        let tweets: Vec<Tweet> = self
            .tweets
            .into_iter()
            .map(|t| Tweet::new(t.id.into_string(), t.text, t.created_at, t.is_retweet))
            .collect();
        let account_age_days = match self.account_age_days {
            Some(d) => d.max(1),
            None => {
                let as_of = opts
                    .as_of
                    .or_else(|| tweets.iter().map(|t| t.created_at).max())
                    .unwrap_or(self.account_created);
                age_days(self.account_created, as_of)
            }
        };
        let profile = UserProfile {
            handle: self.handle,
            statuses_count: self.statuses_count,
            followers_count: self.followers_count,
            listed_count: self.listed_count,
            favourites_count: self.favourites_count,
            bio: self.bio,
            account_created: self.account_created,
            account_age_days,
        };
        Ok((UserRecord { profile, tweets, label }, warning))
    }

    pub fn from_record(user: &UserRecord) -> Self {
        RawUser {
            handle: user.profile.handle.clone(),
            statuses_count: user.profile.statuses_count,
            followers_count: user.profile.followers_count,
            listed_count: user.profile.listed_count,
            favourites_count: user.profile.favourites_count,
            bio: user.profile.bio.clone(),
            account_created: user.profile.account_created,
            account_age_days: Some(user.profile.account_age_days),
            tweets: user
                .tweets
                .iter()
                .map(|t| RawTweet {
                    id: TweetId::Text(t.id.clone()),
                    text: t.text.clone(),
                    created_at: t.created_at,
                    is_retweet: t.is_retweet,
                })
                .collect(),
            traits: user.label,
            raw_traits: None,
            responses: None,
        }
    }
}

/// Parses users JSONL from any reader. Blank lines are skipped silently;
/// every other problem becomes a [`Diagnostic`] and parsing continues.
pub fn parse_users<R: BufRead>(reader: R, opts: &LoadOptions) -> Result<LoadOutcome, std::io::Error> {
    let mut out = LoadOutcome::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawUser = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                out.diagnostics.push(Diagnostic { line: lineno, message: e.to_string(), rejected: true });
                continue;
            }
        };
        match raw.into_record(opts) {
            Ok((record, warning)) => {
                if let Some(message) = warning {
                    out.diagnostics.push(Diagnostic { line: lineno, message, rejected: false });
                }
                out.users.push(record);
            }
            Err(message) => out.diagnostics.push(Diagnostic { line: lineno, message, rejected: true }),
        }
    }
    Ok(out)
}

pub fn load_users(path: &Path, opts: &LoadOptions) -> Result<LoadOutcome, CorpusError> {
    let io_err = |source| CorpusError::Io { path: path.display().to_string(), source };
    let file = std::fs::File::open(path).map_err(io_err)?;
    parse_users(BufReader::new(file), opts).map_err(io_err)
}

/// Writes users in the same JSONL format [`load_users`] reads. Labels are
/// written as normalized `traits` and account age is written explicitly.
pub fn write_users<W: Write>(mut writer: W, users: &[UserRecord]) -> std::io::Result<()> {
    for user in users {
        let line = serde_json::to_string(&RawUser::from_record(user)).map_err(std::io::Error::other)?;
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{"handle":"ann","statuses_count":300,"followers_count":10,"listed_count":1,"favourites_count":4,"bio":"hi","account_created":"2020-01-01T00:00:00Z","tweets":[{"id":1,"text":"hello","created_at":"2020-05-30T00:00:00Z","is_retweet":false},{"id":"2","text":"RT @x yo","created_at":"2020-05-31T00:00:00Z","is_retweet":true}]}"#;

    fn parse(text: &str, opts: &LoadOptions) -> LoadOutcome {
        parse_users(text.as_bytes(), opts).unwrap()
    }

    #[test]
    fn unlabeled_line() {
        let out = parse(LINE, &LoadOptions::default());
        assert_eq!(out.users.len(), 1);
        assert!(out.diagnostics.is_empty());
        let u = &out.users[0];
        assert!(u.label.is_none());
        assert_eq!(u.tweets.len(), 2);
        assert_eq!(u.tweets[0].id, "1");
        // 2020-01-01 to 2020-05-31
        assert_eq!(u.profile.account_age_days, 151);
    }

    #[test]
    fn empty_input() {
        let out = parse("", &LoadOptions::default());
        assert!(out.users.is_empty() && out.diagnostics.is_empty());
    }

    #[test]
    fn malformed_and_missing_field_lines_are_reported() {
        let missing = LINE.replace(r#""followers_count":10,"#, "");
        let text = format!("{LINE}\n{{not json\n{missing}\n");
        let out = parse(&text, &LoadOptions::default());
        assert_eq!(out.users.len(), 1);
        assert_eq!(out.diagnostics.len(), 2);
        assert_eq!(out.diagnostics[0].line, 2);
        assert_eq!(out.diagnostics[1].line, 3);
        assert!(out.diagnostics[1].message.contains("followers_count"));
    }

    #[test]
    fn raw_traits_are_normalized() {
        let raw = r#","raw_traits":{"anxiety":7,"avoidance":1,"openness":5,"conscientiousness":3,"extraversion":1,"agreeableness":2,"neuroticism":4}}"#;
        let line = format!("{}{}", &LINE[..LINE.len() - 1], raw);
        let out = parse(&line, &LoadOptions::default());
        let p = out.users[0].label.unwrap();
        assert_eq!(p.get(PsychTrait::Anxiety), 1.0);
        assert_eq!(p.get(PsychTrait::Conscientiousness), 0.5);
        assert_eq!(p.get(PsychTrait::Neuroticism), 0.75);
    }

    #[test]
    fn responses_without_key_warn_but_keep_user() {
        let line = format!("{}{}", &LINE[..LINE.len() - 1], r#","responses":{"q1":3}}"#);
        let out = parse(&line, &LoadOptions::default());
        assert_eq!(out.users.len(), 1);
        assert!(out.users[0].label.is_none());
        assert!(!out.diagnostics[0].rejected);
    }

    #[test]
    fn write_then_parse_roundtrips() {
        let mut out = parse(LINE, &LoadOptions::default());
        out.users[0].label = Some(TraitProfile::new([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.123456789]));
        let mut buf = Vec::new();
        write_users(&mut buf, &out.users).unwrap();
        let again = parse(std::str::from_utf8(&buf).unwrap(), &LoadOptions::default());
        assert_eq!(again.users, out.users);
    }
}
