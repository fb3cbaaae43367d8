//! Document model, tokenization, n-grams and term-frequency matrices.

mod ngram;
mod tf;
mod tokenize;

use std::collections::HashSet;
use std::fmt;

use chrono::{DateTime, Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize};

pub use ngram::{extract_ngrams, sentence_ngrams, NGram, NgramOrders};
pub use tf::{SparseRow, TfMatrix};
pub use tokenize::{tokenize, Tokenizer};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("article id must not be empty")]
    EmptyId,
    #[error("duplicate article id {0:?}")]
    DuplicateId(String),
    #[error("article {0:?} has neither title nor body")]
    EmptyArticle(String),
    #[error("no n-gram reaches the minimum document frequency")]
    EmptyVocabulary,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid n-gram orders {0:?}; expected a nonempty subset of {{1, 2}}")]
    InvalidOrders(Vec<u8>),
    #[error("min_df must be at least 1")]
    InvalidMinDf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    #[serde(rename = "NYT")]
    Nyt,
    Guardian,
    #[serde(other)]
    Other,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Nyt => "NYT",
            Source::Guardian => "Guardian",
            Source::Other => "Other",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
    #[default]
    Unlabeled,
}

/// One dated news document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub source: Source,
    #[serde(default)]
    pub url: Option<String>,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub body: String,
    #[serde(deserialize_with = "deserialize_date")]
    pub published_at: NaiveDate,
    #[serde(default)]
    pub topic: Option<String>,
    #[serde(default)]
    pub label: Label,
}

impl Article {
    pub fn new(id: impl Into<String>, published_at: NaiveDate, body: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            source: Source::Other,
            url: None,
            title: String::new(),
            body: body.into(),
            published_at,
            topic: None,
            label: Label::Unlabeled,
        }
    }

    /// Title and body joined as the text that gets tokenized.
    pub fn text(&self) -> String {
        match (self.title.is_empty(), self.body.is_empty()) {
            (true, _) => self.body.clone(),
            (false, true) => self.title.clone(),
            (false, false) => format!("{}. {}", self.title, self.body),
        }
    }

    pub fn year(&self) -> i32 {
        self.published_at.year()
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.id.is_empty() {
            return Err(CorpusError::EmptyId);
        }
        if self.title.is_empty() && self.body.is_empty() {
            return Err(CorpusError::EmptyArticle(self.id.clone()));
        }
        Ok(())
    }
}

/// Parse an ISO-8601 date or date-time into its UTC calendar date.
pub fn parse_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.naive_utc().date());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%z", "%Y-%m-%dT%H:%M:%S%.f%z"] {
        if let Ok(dt) = DateTime::parse_from_str(raw, fmt) {
            return Some(dt.naive_utc().date());
        }
    }
    NaiveDate::parse_from_str(raw.get(..10)?, "%Y-%m-%d").ok()
}

fn deserialize_date<'de, D: Deserializer<'de>>(de: D) -> Result<NaiveDate, D::Error> {
    let raw = String::deserialize(de)?;
    parse_date(&raw).ok_or_else(|| serde::de::Error::custom(format!("invalid date {raw:?}")))
}

/// Inclusive calendar-date range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Option<Self> {
        (start <= end).then_some(Self { start, end })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    pub fn overlaps(&self, other: &DateRange) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

/// An ordered collection of articles with unique ids.
///
/// The period of a corpus is the span of its article dates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    articles: Vec<Article>,
}

impl Corpus {
    pub fn new(articles: Vec<Article>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(articles.len());
        for a in &articles {
            a.validate()?;
            if !seen.insert(a.id.as_str()) {
                return Err(CorpusError::DuplicateId(a.id.clone()));
            }
        }
        Ok(Self { articles })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn into_articles(self) -> Vec<Article> {
        self.articles
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Article> {
        self.articles.iter().find(|a| a.id == id)
    }

    pub fn period(&self) -> Option<DateRange> {
        let first = self.articles.first()?.published_at;
        let (lo, hi) = self
            .articles
            .iter()
            .fold((first, first), |(lo, hi), a| (lo.min(a.published_at), hi.max(a.published_at)));
        Some(DateRange { start: lo, end: hi })
    }

    /// Articles whose date falls in `range`, in corpus order.
    pub fn within(&self, range: DateRange) -> Corpus {
        Corpus {
            articles: self
                .articles
                .iter()
                .filter(|a| range.contains(a.published_at))
                .cloned()
                .collect(),
        }
    }

    /// Concatenation of two corpora; ids must stay unique.
    pub fn union(&self, other: &Corpus) -> Result<Corpus, CorpusError> {
        let mut articles = self.articles.clone();
        articles.extend(other.articles.iter().cloned());
        Corpus::new(articles)
    }

    pub fn filter(&self, mut keep: impl FnMut(&Article) -> bool) -> Corpus {
        Corpus {
            articles: self.articles.iter().filter(|a| keep(a)).cloned().collect(),
        }
    }
}
