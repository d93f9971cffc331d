//! Tokenization and stop-word filtering.

use std::collections::HashSet;
use std::io;
use std::path::Path;

const DEFAULT_STOP_WORDS: &str = include_str!("../../data/stopwords_en.txt");

/// Splits text into maximal runs of alphabetic characters, lowercased.
///
/// Digits, punctuation and whitespace all act as separators.
pub fn tokenize(body: &str) -> Vec<String> {
    body.split(|c: char| !c.is_alphabetic())
        .filter(|run| !run.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// A lowercase stop-word set, loaded from a one-word-per-line file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopList {
    words: HashSet<String>,
}

impl StopList {
    pub fn empty() -> Self {
        Self {
            words: HashSet::new(),
        }
    }

    /// The bundled English list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOP_WORDS)
    }

    /// Parses one word per line. Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Self { words }
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            words: words.into_iter().map(|w| w.into().to_lowercase()).collect(),
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Sorted word list, used for hashing build configurations.
    pub fn sorted_words(&self) -> Vec<&str> {
        let mut words: Vec<&str> = self.words.iter().map(String::as_str).collect();
        words.sort_unstable();
        words
    }
}

impl Default for StopList {
    fn default() -> Self {
        Self::english()
    }
}

/// Keeps the tokens not present in `stop_list`, preserving order.
pub fn filter_stop_words(tokens: Vec<String>, stop_list: &StopList) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !stop_list.contains(t))
        .collect()
}
