//! Discriminative keywords between two period corpora, ranked by
//! information gain over article presence.
//!
//! For a combined corpus `T` with period labels and an n-gram `x`, let
//! `S` be the articles containing `x`. The score is
//!
//! ```text
//! IG(T, x) = H(T) - |S|/|T| * H(S)
//! ```
//!
//! where `H` is the binary period entropy in bits. This omits the
//! complement term of textbook information gain; [`IgVariant::Full`] adds
//! `|T \ S|/|T| * H(T \ S)` back for comparison.

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusError, DateRange, NGram, NgramOrders, TfMatrix, Tokenizer};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum KeywordError {
    #[error("n-gram index {index} out of range for vocabulary of {vocab}")]
    IndexOutOfRange { index: usize, vocab: usize },
    #[error("{labels} period labels for {rows} matrix rows")]
    LabelMismatch { labels: usize, rows: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("period {0} corpus is empty")]
    EmptyPeriod(u8),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Period {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IgVariant {
    #[default]
    AsWritten,
    Full,
}

/// Binary entropy in bits of a class split; `0 log 0` is 0.
pub fn entropy_bits(first: usize, second: usize) -> f64 {
    let n = (first + second) as f64;
    if n == 0.0 {
        return 0.0;
    }
    [first, second]
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

pub fn class_entropy(labels: &[Period]) -> f64 {
    let first = labels.iter().filter(|&&l| l == Period::First).count();
    entropy_bits(first, labels.len() - first)
}

/// Per-column counts of containing articles in each period.
fn presence_counts(tf: &TfMatrix, labels: &[Period]) -> Vec<(usize, usize)> {
    let mut counts = vec![(0usize, 0usize); tf.n_cols()];
    for (row, label) in tf.rows().iter().zip(labels) {
        for &(c, _) in row.entries() {
            match label {
                Period::First => counts[c].0 += 1,
                Period::Second => counts[c].1 += 1,
            }
        }
    }
    counts
}

fn gain(total: (usize, usize), present: (usize, usize), variant: IgVariant) -> f64 {
    let n = (total.0 + total.1) as f64;
    let h_t = entropy_bits(total.0, total.1);
    let s = (present.0 + present.1) as f64;
    let mut ig = h_t - (s / n) * entropy_bits(present.0, present.1);
    if variant == IgVariant::Full {
        let rest = (total.0 - present.0, total.1 - present.1);
        ig -= ((n - s) / n) * entropy_bits(rest.0, rest.1);
    }
    ig
}

fn check_labels(tf: &TfMatrix, labels: &[Period]) -> Result<(usize, usize), KeywordError> {
    if labels.len() != tf.n_rows() {
        return Err(KeywordError::LabelMismatch { labels: labels.len(), rows: tf.n_rows() });
    }
    let first = labels.iter().filter(|&&l| l == Period::First).count();
    Ok((first, labels.len() - first))
}

/// Information gain of one vocabulary column, in bits.
pub fn information_gain(
    tf: &TfMatrix,
    labels: &[Period],
    ngram_index: usize,
    variant: IgVariant,
) -> Result<f64, KeywordError> {
    if ngram_index >= tf.n_cols() {
        return Err(KeywordError::IndexOutOfRange { index: ngram_index, vocab: tf.n_cols() });
    }
    let total = check_labels(tf, labels)?;
    let mut present = (0, 0);
    for (r, label) in labels.iter().enumerate() {
        if tf.get(r, ngram_index) > 0 {
            match label {
                Period::First => present.0 += 1,
                Period::Second => present.1 += 1,
            }
        }
    }
    Ok(gain(total, present, variant))
}

/// Information gain of every column in one pass over the rows.
pub fn information_gains(
    tf: &TfMatrix,
    labels: &[Period],
    variant: IgVariant,
) -> Result<Vec<f64>, KeywordError> {
    let total = check_labels(tf, labels)?;
    Ok(presence_counts(tf, labels)
        .into_iter()
        .map(|present| gain(total, present, variant))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredKeyword {
    pub ngram: NGram,
    pub ig_bits: f64,
    pub document_frequency: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordSet {
    pub keywords: Vec<ScoredKeyword>,
    pub period_pair: (Option<DateRange>, Option<DateRange>),
    pub combined_vocab_size: usize,
}

impl KeywordSet {
    pub fn ngrams(&self) -> impl Iterator<Item = &NGram> {
        self.keywords.iter().map(|k| &k.ngram)
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeywordConfig {
    pub k: usize,
    pub orders: NgramOrders,
    pub min_df: usize,
    pub variant: IgVariant,
}

impl Default for KeywordConfig {
    fn default() -> Self {
        Self { k: 6, orders: NgramOrders::BOTH, min_df: 2, variant: IgVariant::AsWritten }
    }
}

/// Top-k n-grams separating `t1` from `t2`.
///
/// Ranking is by score, then by document frequency (larger first), then
/// by the n-gram itself. Under the as-written score every period-pure
/// n-gram reaches the maximum, so the support order decides among them.
pub fn top_k_keywords(
    t1: &Corpus,
    t2: &Corpus,
    tokenizer: &Tokenizer,
    config: &KeywordConfig,
) -> Result<KeywordSet, KeywordError> {
    if config.k == 0 {
        return Err(KeywordError::ZeroK);
    }
    if t1.is_empty() {
        return Err(KeywordError::EmptyPeriod(1));
    }
    if t2.is_empty() {
        return Err(KeywordError::EmptyPeriod(2));
    }
    let combined = t1.union(t2)?;
    let tf = TfMatrix::build(&combined, tokenizer, config.orders, config.min_df)?;
    let labels: Vec<Period> = std::iter::repeat_n(Period::First, t1.len())
        .chain(std::iter::repeat_n(Period::Second, t2.len()))
        .collect();
    let scores = information_gains(&tf, &labels, config.variant)?;
    let df = tf.document_frequencies();

    let mut order: Vec<usize> = (0..tf.n_cols()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then(df[b].cmp(&df[a]))
            .then_with(|| tf.vocab()[a].cmp(&tf.vocab()[b]))
    });
    let keywords = order
        .into_iter()
        .take(config.k)
        .map(|i| ScoredKeyword {
            ngram: tf.vocab()[i].clone(),
            ig_bits: scores[i],
            document_frequency: df[i],
        })
        .collect();

    Ok(KeywordSet {
        keywords,
        period_pair: (t1.period(), t2.period()),
        combined_vocab_size: tf.n_cols(),
    })
}
