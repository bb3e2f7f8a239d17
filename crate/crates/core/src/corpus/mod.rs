//! Canonical data model for the tweet corpus plus loading, cleaning,
//! tokenization and stratified splitting.

mod clean;
mod io;
mod split;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use clean::{clean_text, is_punctuation, EXTRA_PUNCTUATION};
pub(crate) use io::write_records as io_write_records;
pub use io::{load_dataset, write_dataset, DataFormat};
pub use split::{largest_remainder, stratified_split, Split, SplitSpec, StratifyBy, StratumKey};

/// Default token cap applied before modelling.
pub const DEFAULT_MAX_LEN: usize = 50;

pub const MIN_SCORE: f64 = 1.0;
pub const MAX_SCORE: f64 = 5.0;

/// The ten languages of the tweet intimacy corpus, in their fixed
/// reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Language {
    English,
    Spanish,
    Portuguese,
    French,
    Italian,
    Chinese,
    Dutch,
    Korean,
    Arabic,
    Hindi,
}

impl Language {
    pub const ALL: [Language; 10] = [
        Language::English,
        Language::Spanish,
        Language::Portuguese,
        Language::French,
        Language::Italian,
        Language::Chinese,
        Language::Dutch,
        Language::Korean,
        Language::Arabic,
        Language::Hindi,
    ];

    /// Languages present in the training data.
    pub const SEEN: [Language; 6] = [
        Language::English,
        Language::Spanish,
        Language::Portuguese,
        Language::French,
        Language::Italian,
        Language::Chinese,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Language::English => "English",
            Language::Spanish => "Spanish",
            Language::Portuguese => "Portuguese",
            Language::French => "French",
            Language::Italian => "Italian",
            Language::Chinese => "Chinese",
            Language::Dutch => "Dutch",
            Language::Korean => "Korean",
            Language::Arabic => "Arabic",
            Language::Hindi => "Hindi",
        }
    }

    /// ISO 639-1 code.
    pub fn code(self) -> &'static str {
        match self {
            Language::English => "en",
            Language::Spanish => "es",
            Language::Portuguese => "pt",
            Language::French => "fr",
            Language::Italian => "it",
            Language::Chinese => "zh",
            Language::Dutch => "nl",
            Language::Korean => "ko",
            Language::Arabic => "ar",
            Language::Hindi => "hi",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown language tag `{0}`")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    /// Accepts full English names and ISO 639-1 codes, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_lowercase();
        Language::ALL
            .into_iter()
            .find(|l| l.name().to_lowercase() == key || l.code() == key)
            .ok_or_else(|| UnknownLanguage(s.to_string()))
    }
}

impl Serialize for Language {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Language {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tweet {
    pub id: u64,
    pub text: String,
    pub language: Language,
    pub score: Option<f64>,
}

impl Tweet {
    pub fn new(
        id: u64,
        text: impl Into<String>,
        language: Language,
        score: Option<f64>,
    ) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::InvalidParameter(format!(
                "tweet {id} has empty text"
            )));
        }
        if let Some(s) = score {
            check_score(s).map_err(|m| Error::InvalidParameter(format!("tweet {id}: {m}")))?;
        }
        Ok(Tweet {
            id,
            text,
            language,
            score,
        })
    }

    pub fn require_score(&self) -> Result<f64> {
        self.score.ok_or(Error::Unscored { id: self.id })
    }
}

pub(crate) fn check_score(s: f64) -> std::result::Result<(), String> {
    if s.is_finite() && (MIN_SCORE..=MAX_SCORE).contains(&s) {
        Ok(())
    } else {
        Err(format!("score {s} outside [{MIN_SCORE}, {MAX_SCORE}]"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Validation,
    Test,
    Custom,
}

impl SplitName {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Validation => "validation",
            SplitName::Test => "test",
            SplitName::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    tweets: Vec<Tweet>,
    pub source: String,
    pub name: SplitName,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate ids.
    pub fn new(tweets: Vec<Tweet>, source: impl Into<String>, name: SplitName) -> Result<Self> {
        let mut seen = HashSet::with_capacity(tweets.len());
        for t in &tweets {
            if !seen.insert(t.id) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate tweet id {}",
                    t.id
                )));
            }
        }
        Ok(Corpus {
            tweets,
            source: source.into(),
            name,
        })
    }

    pub fn empty(source: impl Into<String>, name: SplitName) -> Self {
        Corpus {
            tweets: Vec::new(),
            source: source.into(),
            name,
        }
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn into_tweets(self) -> Vec<Tweet> {
        self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tweet> {
        self.tweets.iter()
    }

    /// Scores of every tweet, failing on the first unscored one.
    pub fn scores(&self) -> Result<Vec<f64>> {
        self.tweets.iter().map(Tweet::require_score).collect()
    }

    /// True when ids are exactly `0..len` in order, i.e. they coincide with
    /// row indices in a written file.
    pub fn has_row_index_ids(&self) -> bool {
        self.tweets
            .iter()
            .enumerate()
            .all(|(i, t)| t.id == i as u64)
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Tweet;
    type IntoIter = std::slice::Iter<'a, Tweet>;

    fn into_iter(self) -> Self::IntoIter {
        self.tweets.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
    pub truncated: bool,
}

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Whitespace tokenization of already-cleaned text, capped at `max_len`.
pub fn tokenize(cleaned: &str, max_len: usize) -> TokenSeq {
    let mut tokens = Vec::new();
    let mut truncated = false;
    for tok in cleaned.split_whitespace() {
        if tokens.len() == max_len {
            truncated = true;
            break;
        }
        tokens.push(tok.to_string());
    }
    TokenSeq { tokens, truncated }
}

/// Number of whitespace tokens with no length cap.
pub fn token_count(cleaned: &str) -> usize {
    cleaned.split_whitespace().count()
}
