use crate::corpus::UserRecord;
use crate::textprep::is_url;

/// Column names of [`behavioral_vector`], in emission order. Bio length is
/// emitted twice, as `bio_length` and `bio_length_platform`.
pub const BEHAVIORAL_NAMES: [&str; 15] = [
    "statuses_count",
    "tweets_per_day",
    "shared_urls",
    "hashtags_used",
    "bio_length",
    "mean_tweet_chars",
    "mean_words_per_tweet",
    "mean_uppercase_words",
    "followers_count",
    "listed_count",
    "mentions_made",
    "retweets_made",
    "account_age_days",
    "favourites_count",
    "bio_length_platform",
];

/// A whitespace token is an all-uppercase word when it has at least two ASCII
/// letters and no lowercase letters. Mentions, URLs and hashtags are not words.
pub fn is_uppercase_word(token: &str) -> bool {
    if token.starts_with('@') || token.starts_with('#') || is_url(token) {
        return false;
    }
    let letters = token.chars().filter(char::is_ascii_alphabetic).count();
    letters >= 2 && !token.chars().any(char::is_lowercase)
}

fn uppercase_words(text: &str) -> usize {
    text.split_whitespace().enumerate().filter(|(i, t)| !(*i == 0 && *t == "RT") && is_uppercase_word(t)).count()
}

/// The 15 profile and activity attributes, aligned with [`BEHAVIORAL_NAMES`].
pub fn behavioral_vector(user: &UserRecord) -> [f64; 15] {
    let p = &user.profile;
    let age = p.account_age_days.max(1) as f64;
    let n_tweets = user.tweets.len();
    let mean = |total: usize| if n_tweets == 0 { 0.0 } else { total as f64 / n_tweets as f64 };
    let mut urls = 0;
    let mut hashtags = 0;
    let mut mentions = 0;
    let mut chars = 0;
    let mut words = 0;
    let mut upper = 0;
    let mut retweets = 0;
    for t in &user.tweets {
        urls += t.text.split_whitespace().filter(|w| is_url(w)).count();
        hashtags += t.hashtag_count();
        mentions += t.mention_count();
        chars += t.text.chars().count();
        words += t.text.split_whitespace().count();
        upper += uppercase_words(&t.text);
        retweets += usize::from(t.is_retweet);
    }
    let bio = p.bio.chars().count() as f64;
    [
        p.statuses_count as f64,
        p.statuses_count as f64 / age,
        urls as f64,
        hashtags as f64,
        bio,
        mean(chars),
        mean(words),
        mean(upper),
        p.followers_count as f64,
        p.listed_count as f64,
        mentions as f64,
        retweets as f64,
        p.account_age_days as f64,
        p.favourites_count as f64,
        bio,
    ]
}
