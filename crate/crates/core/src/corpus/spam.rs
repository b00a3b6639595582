use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::UserRecord;
use crate::textprep::{clean, tokenize};

/// Thresholds for spam and ghost removal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpamPolicy {
    /// A tweet with at least this many hashtags is a spam candidate.
    pub hashtag_threshold: usize,
    /// Jaccard similarity over cleaned token sets that marks two tweets as near-duplicates.
    pub similarity_threshold: f64,
    /// Number of near-duplicate high-hashtag tweets that marks the whole user as spam.
    pub repetition_min: usize,
    /// Users with fewer statuses are ghosts.
    pub min_statuses: u64,
    /// Users with fewer followers are ghosts.
    pub min_followers: u64,
}

impl Default for SpamPolicy {
    fn default() -> Self {
        SpamPolicy {
            hashtag_threshold: 5,
            similarity_threshold: 0.8,
            repetition_min: 3,
            min_statuses: 1,
            min_followers: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RemovalRule {
    GhostNoStatuses,
    GhostFewFollowers,
    GhostNoTweets,
    RepetitiveSpamUser,
    SpamTweet,
}

impl fmt::Display for RemovalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RemovalRule::GhostNoStatuses => "ghost_no_statuses",
            RemovalRule::GhostFewFollowers => "ghost_few_followers",
            RemovalRule::GhostNoTweets => "ghost_no_tweets",
            RemovalRule::RepetitiveSpamUser => "repetitive_spam_user",
            RemovalRule::SpamTweet => "spam_tweet",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Removal {
    pub handle: String,
    pub rule: RemovalRule,
    pub detail: String,
}

/// Jaccard similarity of two sets; two empty sets are identical.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

fn token_set(text: &str) -> BTreeSet<String> {
    tokenize("", &clean(text)).tokens.into_iter().collect()
}

/// Counts high-hashtag tweets that have at least one near-duplicate among
/// the other high-hashtag tweets of the same user.
fn near_duplicate_count(user: &UserRecord, policy: &SpamPolicy) -> usize {
    let sets: Vec<BTreeSet<String>> = user
        .tweets
        .iter()
        .filter(|t| t.hashtag_count() >= policy.hashtag_threshold)
        .map(|t| token_set(&t.text))
        .collect();
    (0..sets.len())
        .filter(|&i| (0..sets.len()).any(|j| j != i && jaccard(&sets[i], &sets[j]) >= policy.similarity_threshold))
        .count()
}

/// Removes ghost and repetitive spam users, and drops individual
/// high-hashtag tweets from everyone else. Idempotent.
pub fn filter_spam(users: &[UserRecord], policy: &SpamPolicy) -> (Vec<UserRecord>, Vec<Removal>) {
    let mut kept = Vec::with_capacity(users.len());
    let mut report = Vec::new();
    for user in users {
        let handle = &user.profile.handle;
        let remove = |rule, detail: String| Removal { handle: handle.clone(), rule, detail };
        if user.profile.statuses_count < policy.min_statuses {
            report.push(remove(RemovalRule::GhostNoStatuses, format!("statuses_count={}", user.profile.statuses_count)));
            continue;
        }
        if user.profile.followers_count < policy.min_followers {
            report.push(remove(
                RemovalRule::GhostFewFollowers,
                format!("followers_count={}", user.profile.followers_count),
            ));
            continue;
        }
        let dupes = near_duplicate_count(user, policy);
        if dupes >= policy.repetition_min {
            report.push(remove(RemovalRule::RepetitiveSpamUser, format!("near_duplicate_tweets={dupes}")));
            continue;
        }
        let mut filtered = user.clone();
        filtered.tweets.retain(|t| {
            let spam = t.hashtag_count() >= policy.hashtag_threshold;
            if spam {
                report.push(remove(RemovalRule::SpamTweet, format!("tweet_id={} hashtags={}", t.id, t.hashtag_count())));
            }
            !spam
        });
        if filtered.tweets.is_empty() {
            report.push(remove(RemovalRule::GhostNoTweets, "no tweets after filtering".to_string()));
            continue;
        }
        kept.push(filtered);
    }
    (kept, report)
}

/// Writes the `handle,rule,detail` CSV.
pub fn write_removal_report<W: Write>(writer: W, removals: &[Removal]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["handle", "rule", "detail"])?;
    for r in removals {
        w.write_record([r.handle.as_str(), &r.rule.to_string(), r.detail.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Tweet, UserProfile};
    use chrono::{DateTime, Utc};
    use proptest::prelude::*;

    fn user(handle: &str, statuses: u64, followers: u64, texts: &[&str]) -> UserRecord {
        UserRecord {
            profile: UserProfile {
                handle: handle.into(),
                statuses_count: statuses,
                followers_count: followers,
                listed_count: 0,
                favourites_count: 0,
                bio: String::new(),
                account_created: DateTime::<Utc>::UNIX_EPOCH,
                account_age_days: 10,
            },
            tweets: texts
                .iter()
                .enumerate()
                .map(|(i, t)| Tweet::new(i.to_string(), *t, DateTime::<Utc>::UNIX_EPOCH, false))
                .collect(),
            label: None,
        }
    }

    const CONTEST: &str = "win a free phone today #win #free #contest #giveaway #phone";

    #[test]
    fn repetitive_contest_user_removed() {
        let u = user("spammer", 50, 100, &[CONTEST, CONTEST, "win a free phone now #win #free #contest #giveaway #phone", CONTEST]);
        let (kept, report) = filter_spam(&[u], &SpamPolicy::default());
        assert!(kept.is_empty());
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].rule, RemovalRule::RepetitiveSpamUser);
    }

    #[test]
    fn single_spam_tweet_dropped_user_kept() {
        let mut texts: Vec<String> = (0..100).map(|i| format!("normal tweet number {i} about life")).collect();
        texts.insert(40, CONTEST.to_string());
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let (kept, report) = filter_spam(&[user("ok", 500, 50, &refs)], &SpamPolicy::default());
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].tweets.len(), 100);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].rule, RemovalRule::SpamTweet);
    }

    #[test]
    fn ghosts_removed() {
        let users = [user("a", 0, 100, &["hi"]), user("b", 10, 1, &["hi"]), user("c", 10, 10, &[])];
        let (kept, report) = filter_spam(&users, &SpamPolicy::default());
        assert!(kept.is_empty());
        let rules: Vec<_> = report.iter().map(|r| r.rule).collect();
        assert_eq!(rules, [RemovalRule::GhostNoStatuses, RemovalRule::GhostFewFollowers, RemovalRule::GhostNoTweets]);
    }

    #[test]
    fn report_csv_shape() {
        let (_, report) = filter_spam(&[user("a", 0, 100, &["hi"])], &SpamPolicy::default());
        let mut buf = Vec::new();
        write_removal_report(&mut buf, &report).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "handle,rule,detail\na,ghost_no_statuses,statuses_count=0\n");
    }

    fn arb_user() -> impl Strategy<Value = UserRecord> {
        let tweet = prop_oneof![
            Just("hello world".to_string()),
            Just(CONTEST.to_string()),
            Just("#a #b #c #d #e different words here".to_string()),
            "[a-z #]{0,30}",
        ];
        (0u64..3, 0u64..4, proptest::collection::vec(tweet, 0..8)).prop_map(|(s, f, texts)| {
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            user("u", s, f, &refs)
        })
    }

    proptest! {
        #[test]
        fn idempotent_and_shrinking(users in proptest::collection::vec(arb_user(), 0..6)) {
            let policy = SpamPolicy::default();
            let (once, _) = filter_spam(&users, &policy);
            let (twice, second_report) = filter_spam(&once, &policy);
            prop_assert_eq!(&once, &twice);
            prop_assert!(second_report.is_empty());
            prop_assert!(once.len() <= users.len());
            for kept in &once {
                prop_assert!(!kept.tweets.is_empty());
                let before = users.iter().map(|u| u.tweets.len()).max().unwrap_or(0);
                prop_assert!(kept.tweets.len() <= before);
            }
        }
    }
}
