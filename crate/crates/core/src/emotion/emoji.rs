use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::lexicon::LineDiagnostic;
use super::{read_file, Emotion, EmotionError};

/// Emoji sequences mapped to emotions, matched longest first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EmojiMap {
    map: BTreeMap<String, Emotion>,
    max_chars: usize,
}

impl EmojiMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, emoji: &str, e: Emotion) {
        self.max_chars = self.max_chars.max(emoji.chars().count());
        self.map.insert(emoji.to_string(), e);
    }

    pub fn get(&self, emoji: &str) -> Option<Emotion> {
        self.map.get(emoji).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Lines of `emoji<TAB>emotion`; a later line for the same emoji wins.
    pub fn parse<R: BufRead>(reader: R) -> Result<(Self, Vec<LineDiagnostic>), std::io::Error> {
        let mut out = EmojiMap::new();
        let mut diags = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let message = match line.split_once('\t') {
                Some((emoji, label)) if !emoji.trim().is_empty() => match label.parse::<Emotion>() {
                    Ok(e) => {
                        out.insert(emoji.trim(), e);
                        continue;
                    }
                    Err(_) => format!("unknown emotion label `{}`", label.trim()),
                },
                _ => "expected `emoji<TAB>emotion`".to_string(),
            };
            diags.push(LineDiagnostic { line: i + 1, message });
        }
        Ok((out, diags))
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<LineDiagnostic>), EmotionError> {
        let text = read_file(path)?;
        Self::parse(text.as_bytes()).map_err(|source| EmotionError::Io { path: path.display().to_string(), source })
    }

    /// Mapped emojis in `text`, scanning left to right and taking the longest
    /// mapped sequence at each position.
    pub fn matches(&self, text: &str) -> Vec<Emotion> {
        let bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).chain([text.len()]).collect();
        let n_chars = bounds.len() - 1;
        let mut found = Vec::new();
        let mut i = 0;
        while i < n_chars {
            let hit = (1..=self.max_chars.min(n_chars - i))
                .rev()
                .find_map(|len| self.map.get(&text[bounds[i]..bounds[i + len]]).map(|&e| (len, e)));
            match hit {
                Some((len, e)) => {
                    found.push(e);
                    i += len;
                }
                None => i += 1,
            }
        }
        found
    }
}

/// Share of each emotion among the mapped emojis in all texts; zero when
/// there are none.
pub fn emoji_emotion_freq<S: AsRef<str>>(raw_texts: &[S], map: &EmojiMap) -> [f64; 6] {
    let mut counts = [0usize; 6];
    for t in raw_texts {
        for e in map.matches(t.as_ref()) {
            counts[e.index()] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return [0.0; 6];
    }
    counts.map(|c| c as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map() -> EmojiMap {
        let (m, diags) = EmojiMap::parse("😀\tjoy\n😢\tsadness\n❤️\tjoy\n😱\tfear\n".as_bytes()).unwrap();
        assert!(diags.is_empty());
        m
    }

    #[test]
    fn counting_shares() {
        let f = emoji_emotion_freq(&["😀😀😢"], &map());
        assert_eq!(f[Emotion::Joy.index()], 2.0 / 3.0);
        assert_eq!(f[Emotion::Sadness.index()], 1.0 / 3.0);
        assert_eq!(emoji_emotion_freq(&["no emoji here"], &map()), [0.0; 6]);
        // 🐱 is unmapped and counts nowhere
        assert_eq!(emoji_emotion_freq(&["🐱😱🐱"], &map())[Emotion::Fear.index()], 1.0);
    }

    #[test]
    fn longest_match_first() {
        let mut m = map();
        m.insert("❤", Emotion::Surprise);
        assert_eq!(m.matches("❤️x❤"), [Emotion::Joy, Emotion::Surprise]);
    }

    #[test]
    fn order_invariant() {
        let a = emoji_emotion_freq(&["😀 hi", "😢😱"], &map());
        let b = emoji_emotion_freq(&["😢😱", "😀 hi"], &map());
        assert_eq!(a, b);
    }

    #[test]
    fn bad_lines() {
        let (m, diags) = EmojiMap::parse("😀\tboredom\nnolabel\n".as_bytes()).unwrap();
        assert!(m.is_empty());
        assert_eq!(diags.len(), 2);
    }
}
