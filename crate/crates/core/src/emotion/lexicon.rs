use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_file, Emotion, EmotionError};
use crate::textprep::stem;

/// A skipped lexicon line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDiagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AffectLexicon {
    emotions: BTreeMap<String, BTreeMap<Emotion, f64>>,
    sentiment: BTreeMap<String, (f64, f64)>,
    synsets: BTreeMap<String, Vec<String>>,
}

fn merge_max(entry: &mut BTreeMap<Emotion, f64>, e: Emotion, strength: f64) {
    let s = entry.entry(e).or_insert(strength);
    *s = s.max(strength);
}

fn parse_score(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

impl AffectLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an emotion entry; a repeated `(word, emotion)` keeps the larger strength.
    pub fn add_emotion(&mut self, word: &str, e: Emotion, strength: f64) {
        merge_max(self.emotions.entry(word.to_string()).or_default(), e, strength);
    }

    pub fn add_sentiment(&mut self, word: &str, positive: f64, negative: f64) {
        let s = self.sentiment.entry(word.to_string()).or_insert((positive, negative));
        *s = (s.0.max(positive), s.1.max(negative));
    }

    pub fn add_synset(&mut self, id: &str, words: Vec<String>) {
        self.synsets.entry(id.to_string()).or_default().extend(words);
    }

    pub fn emotions(&self, word: &str) -> Option<&BTreeMap<Emotion, f64>> {
        self.emotions.get(word)
    }

    pub fn strength(&self, word: &str, e: Emotion) -> Option<f64> {
        self.emotions.get(word).and_then(|m| m.get(&e)).copied()
    }

    /// `(positive, negative)` scores.
    pub fn sentiment(&self, word: &str) -> Option<(f64, f64)> {
        self.sentiment.get(word).copied()
    }

    pub fn synsets(&self) -> &BTreeMap<String, Vec<String>> {
        &self.synsets
    }

    pub fn n_emotion_words(&self) -> usize {
        self.emotions.len()
    }

    pub fn n_sentiment_words(&self) -> usize {
        self.sentiment.len()
    }

    /// Parses the three line shapes, told apart by their columns:
    /// `word<TAB>emotion<TAB>strength`, `word<TAB>pos<TAB>neg` (numeric second
    /// column) and `synset_id<TAB>word,word,...`. Blank lines and `#` comments
    /// are ignored; malformed lines are skipped with a diagnostic.
    pub fn parse<R: BufRead>(reader: R) -> Result<(Self, Vec<LineDiagnostic>), std::io::Error> {
        let mut lex = AffectLexicon::new();
        let mut diags = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let n = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut skip = |message: String| diags.push(LineDiagnostic { line: n, message });
            let cols: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
            match cols.as_slice() {
                [id, words] => {
                    let words: Vec<String> =
                        words.split(',').map(|w| w.trim().to_lowercase()).filter(|w| !w.is_empty()).collect();
                    if words.is_empty() {
                        skip(format!("synonym group `{id}` has no words"));
                    } else {
                        lex.add_synset(id, words);
                    }
                }
                [word, second, third] => {
                    let word = word.to_lowercase();
                    if let Some(pos) = parse_score(second) {
                        match parse_score(third) {
                            Some(neg) if pos >= 0.0 && neg >= 0.0 => lex.add_sentiment(&word, pos, neg),
                            _ => skip(format!("bad sentiment scores for `{word}`")),
                        }
                        continue;
                    }
                    let Ok(e) = second.parse::<Emotion>() else {
                        skip(format!("unknown emotion label `{second}`"));
                        continue;
                    };
                    match parse_score(third) {
                        Some(s) if s > 0.0 && s <= 1.0 => lex.add_emotion(&word, e, s),
                        _ => skip(format!("strength `{third}` outside (0, 1]")),
                    }
                }
                _ => skip(format!("expected 2 or 3 tab-separated columns, got {}", cols.len())),
            }
        }
        Ok((lex, diags))
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<LineDiagnostic>), EmotionError> {
        let text = read_file(path)?;
        Self::parse(text.as_bytes()).map_err(|source| EmotionError::Io { path: path.display().to_string(), source })
    }

    /// The same lexicon keyed by stemmed words, for matching stemmed tokens.
    /// Words that share a stem merge by maximum.
    pub fn stemmed(&self) -> Self {
        let mut out = AffectLexicon { synsets: self.synsets.clone(), ..Self::default() };
        for (w, m) in &self.emotions {
            for (&e, &s) in m {
                out.add_emotion(&stem(w), e, s);
            }
        }
        for (w, &(p, n)) in &self.sentiment {
            out.add_sentiment(&stem(w), p, n);
        }
        out
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Every word of a synonym group inherits the emotion entries of the other
/// members, taking the maximum strength per emotion. Groups that share a word
/// are merged, so the result is closed and a second pass changes nothing.
pub fn expand_lexicon(lex: &AffectLexicon) -> AffectLexicon {
    let words: Vec<&String> = {
        let mut w: Vec<&String> = lex.synsets.values().flatten().collect();
        w.sort();
        w.dedup();
        w
    };
    let id = |w: &String| words.binary_search(&w).expect("collected above");
    let mut parent: Vec<usize> = (0..words.len()).collect();
    for group in lex.synsets.values() {
        if let Some(first) = group.first() {
            let root = find(&mut parent, id(first));
            for w in &group[1..] {
                let r = find(&mut parent, id(w));
                parent[r] = root;
            }
        }
    }
    let mut pooled: BTreeMap<usize, BTreeMap<Emotion, f64>> = BTreeMap::new();
    for (i, w) in words.iter().enumerate() {
        if let Some(m) = lex.emotions.get(*w) {
            let root = find(&mut parent, i);
            let pool = pooled.entry(root).or_default();
            for (&e, &s) in m {
                merge_max(pool, e, s);
            }
        }
    }
    let mut out = lex.clone();
    for (i, w) in words.iter().enumerate() {
        if let Some(pool) = pooled.get(&find(&mut parent, i)) {
            for (&e, &s) in pool {
                out.add_emotion(w, e, s);
            }
        }
    }
    out
}
