use super::lexicon::AffectLexicon;

/// Summed lexicon strengths per emotion over all tokens, divided by the
/// token count.
pub fn text_emotion_freq<S: AsRef<str>>(tweets: &[Vec<S>], lex: &AffectLexicon) -> [f64; 6] {
    let mut sums = [0.0; 6];
    let mut n = 0usize;
    for tok in tweets.iter().flatten() {
        n += 1;
        if let Some(m) = lex.emotions(tok.as_ref()) {
            for (e, s) in m {
                sums[e.index()] += s;
            }
        }
    }
    if n == 0 {
        return [0.0; 6];
    }
    sums.map(|s| s / n as f64)
}

/// Per-tweet sums of positive and negative scores, averaged over tweets.
pub fn sentiment_scores<S: AsRef<str>>(tweets: &[Vec<S>], lex: &AffectLexicon) -> (f64, f64) {
    if tweets.is_empty() {
        return (0.0, 0.0);
    }
    let (mut pos, mut neg) = (0.0, 0.0);
    for tweet in tweets {
        for tok in tweet {
            if let Some((p, n)) = lex.sentiment(tok.as_ref()) {
                pos += p;
                neg += n;
            }
        }
    }
    (pos / tweets.len() as f64, neg / tweets.len() as f64)
}
