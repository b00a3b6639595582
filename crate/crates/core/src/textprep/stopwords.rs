use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use super::TextError;

/// English stopwords, in cleaned form (apostrophes already stripped).
const DEFAULT_ENGLISH: &str = "
a about above after again against ain all am an and any are aren arent as at
be because been before being below between both but by
can cannot couldn couldnt could
d did didn didnt do does doesn doesnt doing don dont down during
each few for from further
had hadn hadnt has hasn hasnt have haven havent having he her here hers herself him himself his how
i if im in into is isn isnt it its itself ive
just ll m ma me mightn more most mustn my myself
needn no nor not now o of off on once only or other our ours ourselves out over own
re s same shan she shes should shouldn shouldnt so some such
t than that thats the their theirs them themselves then there these they this those through to too
under until up us ve very
was wasn wasnt we were weren werent what when where which while who whom why will with won wont wouldn wouldnt
y you youd youll youre youve your yours yourself yourselves
";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    pub fn default_english() -> Self {
        Stopwords(DEFAULT_ENGLISH.split_whitespace().map(str::to_string).collect())
    }

    pub fn empty() -> Self {
        Stopwords(BTreeSet::new())
    }

    /// One word per line; `#` starts a comment.
    pub fn from_reader<R: BufRead>(reader: R) -> std::io::Result<Self> {
        let mut set = BTreeSet::new();
        for line in reader.lines() {
            let line = line?;
            let content = line.split('#').next().unwrap_or("").trim();
            if !content.is_empty() {
                set.insert(content.to_ascii_lowercase());
            }
        }
        Ok(Stopwords(set))
    }

    pub fn load(path: &Path) -> Result<Self, TextError> {
        let io = |source| TextError::Io { path: path.display().to_string(), source };
        let file = std::fs::File::open(path).map_err(io)?;
        Self::from_reader(std::io::BufReader::new(file)).map_err(io)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::default_english()
    }
}
