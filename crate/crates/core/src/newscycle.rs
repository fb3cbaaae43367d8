//! Annual news-cycle features: volume, mean sentiment and mean normalized
//! correlation (MNC, the mean pairwise Pearson correlation of article
//! term-frequency vectors).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Article, Corpus, CorpusError, NgramOrders, SparseRow, TfMatrix, Tokenizer};
use crate::stats::{compensated_sum, median};

const BUNDLED_POSITIVE: &str = include_str!("../resources/positive.txt");
const BUNDLED_NEGATIVE: &str = include_str!("../resources/negative.txt");

#[derive(Debug, thiserror::Error)]
pub enum CycleError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("a vector has zero variance")]
    ZeroVariance,
    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("need at least two articles with varying term counts, got {0}")]
    TooFewArticles(usize),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("year {0} is not in the series")]
    YearNotInSeries(i32),
    #[error("lexicon {0}: {1}")]
    Lexicon(String, String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Positive and negative polarity word lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    positive: BTreeSet<String>,
    negative: BTreeSet<String>,
}

impl Lexicon {
    pub fn new<I, J, S, T>(positive: I, negative: J) -> Result<Self, CycleError>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let positive: BTreeSet<String> = positive.into_iter().map(|w| w.as_ref().trim().to_lowercase()).filter(|w| !w.is_empty()).collect();
        let negative: BTreeSet<String> = negative.into_iter().map(|w| w.as_ref().trim().to_lowercase()).filter(|w| !w.is_empty()).collect();
        if positive.is_empty() || negative.is_empty() {
            return Err(CycleError::Lexicon("lexicon".into(), "word lists must be nonempty".into()));
        }
        if let Some(w) = positive.intersection(&negative).next() {
            return Err(CycleError::Lexicon("lexicon".into(), format!("{w:?} is both positive and negative")));
        }
        Ok(Self { positive, negative })
    }

    /// The lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Self::new(BUNDLED_POSITIVE.lines(), BUNDLED_NEGATIVE.lines()).expect("bundled lexicon is valid")
    }

    /// Read `positive.txt` and `negative.txt` (one word per line) from `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self, CycleError> {
        let pos = fs::read_to_string(dir.join("positive.txt"))?;
        let neg = fs::read_to_string(dir.join("negative.txt"))?;
        Self::new(pos.lines(), neg.lines())
    }

    pub fn polarity_of(&self, word: &str) -> i8 {
        if self.positive.contains(word) {
            1
        } else if self.negative.contains(word) {
            -1
        } else {
            0
        }
    }
}

/// `(pos - neg) / (pos + neg)` over the article's tokens; 0 without hits.
pub fn article_polarity(article: &Article, lexicon: &Lexicon, tokenizer: &Tokenizer) -> f64 {
    token_polarity(&tokenizer.tokenize(&article.text()), lexicon)
}

pub fn token_polarity(tokens: &[String], lexicon: &Lexicon) -> f64 {
    let (mut pos, mut neg) = (0u32, 0u32);
    for t in tokens {
        match lexicon.polarity_of(t) {
            1 => pos += 1,
            -1 => neg += 1,
            _ => {}
        }
    }
    if pos + neg == 0 {
        0.0
    } else {
        (f64::from(pos) - f64::from(neg)) / f64::from(pos + neg)
    }
}

/// Pearson product-moment correlation.
pub fn pearson(u: &[f64], v: &[f64]) -> Result<f64, CycleError> {
    if u.len() != v.len() {
        return Err(CycleError::LengthMismatch(u.len(), v.len()));
    }
    if u.len() < 2 {
        return Err(CycleError::TooShort { needed: 2, got: u.len() });
    }
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let (mut suv, mut suu, mut svv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let (da, db) = (a - mu, b - mv);
        suv += da * db;
        suu += da * da;
        svv += db * db;
    }
    if suu == 0.0 || svv == 0.0 {
        return Err(CycleError::ZeroVariance);
    }
    Ok((suv / (suu.sqrt() * svv.sqrt())).clamp(-1.0, 1.0))
}

/// Centred statistics of a sparse count row over `width` columns.
struct RowMoments {
    mean: f64,
    centred_norm: f64,
}

fn row_moments(row: &SparseRow, width: usize) -> RowMoments {
    let n = width as f64;
    let sum: f64 = row.entries().iter().map(|&(_, c)| f64::from(c)).sum();
    let mean = sum / n;
    let nonzero: f64 = row.entries().iter().map(|&(_, c)| (f64::from(c) - mean).powi(2)).sum();
    let zeros = (width - row.entries().len()) as f64;
    RowMoments { mean, centred_norm: (nonzero + zeros * mean * mean).sqrt() }
}

/// Pearson correlation of two sparse rows without densifying them.
fn sparse_pearson(a: &SparseRow, ma: &RowMoments, b: &SparseRow, mb: &RowMoments, width: usize) -> f64 {
    // sum over all columns of (a - ma)(b - mb)
    //   = sum_{a,b both stored} a b - mb * sum a - ma * sum b + width ma mb
    let (ea, eb) = (a.entries(), b.entries());
    let (mut i, mut j, mut cross) = (0, 0, 0.0);
    while i < ea.len() && j < eb.len() {
        match ea[i].0.cmp(&eb[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                cross += f64::from(ea[i].1) * f64::from(eb[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    let n = width as f64;
    let cov = cross - n * ma.mean * mb.mean;
    (cov / (ma.centred_norm * mb.centred_norm)).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MncResult {
    pub mnc: f64,
    pub pairs: usize,
    /// Rows left out because their counts do not vary.
    pub excluded_rows: usize,
}

/// Mean Pearson correlation over all unordered pairs of TF rows.
///
/// Identical rows correlate at exactly 1, including rows without
/// variance. Other pairs involving a row without variance are left out,
/// and such a row with no identical partner counts as excluded. Pairs are
/// visited in `(i, j)` order and summed with compensation.
pub fn mnc(tf: &TfMatrix) -> Result<MncResult, CycleError> {
    let width = tf.n_cols();
    let moments: Vec<RowMoments> = tf.rows().iter().map(|r| row_moments(r, width)).collect();
    let varies: Vec<bool> = moments
        .iter()
        .map(|m| m.centred_norm > 1e-12 * (m.mean.abs() * width as f64).max(1.0))
        .collect();
    let n = tf.n_rows();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| (varies[i] && varies[j]) || tf.row(i) == tf.row(j))
        .collect();
    let mut paired = vec![false; n];
    for &(i, j) in &pairs {
        paired[i] = true;
        paired[j] = true;
    }
    let excluded_rows = paired.iter().filter(|&&p| !p).count();
    if pairs.is_empty() {
        return Err(CycleError::TooFewArticles(n - excluded_rows));
    }
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| {
            if tf.row(a) == tf.row(b) {
                1.0
            } else {
                sparse_pearson(tf.row(a), &moments[a], tf.row(b), &moments[b], width)
            }
        })
        .collect();
    Ok(MncResult {
        mnc: compensated_sum(values.iter().copied()) / values.len() as f64,
        pairs: values.len(),
        excluded_rows,
    })
}

/// Mean normalized correlation of a corpus, over its own unigram vocabulary.
pub fn corpus_mnc(corpus: &Corpus, tokenizer: &Tokenizer, orders: NgramOrders) -> Result<MncResult, CycleError> {
    if corpus.len() < 2 {
        return Err(CycleError::TooFewArticles(corpus.len()));
    }
    let tf = TfMatrix::build(corpus, tokenizer, orders, 1)?;
    mnc(&tf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleOptions {
    pub orders: NgramOrders,
    /// Score every year against one vocabulary built from the whole corpus.
    pub global_vocab: bool,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self { orders: NgramOrders::UNIGRAMS, global_vocab: false }
    }
}

/// Per-year feature values over a contiguous run of years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualFeatureSeries {
    pub topic: String,
    pub years: Vec<i32>,
    pub volume: Vec<u64>,
    pub mean_sentiment: Vec<Option<f64>>,
    pub mnc: Vec<Option<f64>>,
    pub legislative: Option<Vec<bool>>,
}

impl AnnualFeatureSeries {
    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn year_index(&self, year: i32) -> Option<usize> {
        self.years.iter().position(|&y| y == year)
    }

    /// Attach ground-truth labels; years absent from `years` are false.
    pub fn with_legislative(mut self, years: &BTreeSet<i32>) -> Self {
        self.legislative = Some(self.years.iter().map(|y| years.contains(y)).collect());
        self
    }
}

pub fn annual_features(
    topic: &str,
    corpus: &Corpus,
    lexicon: &Lexicon,
    tokenizer: &Tokenizer,
    legislative_years: Option<&BTreeSet<i32>>,
    options: &CycleOptions,
) -> Result<AnnualFeatureSeries, CycleError> {
    if corpus.is_empty() {
        return Err(CycleError::EmptyCorpus);
    }
    let mut by_year: BTreeMap<i32, Vec<&Article>> = BTreeMap::new();
    for a in corpus.articles() {
        by_year.entry(a.year()).or_default().push(a);
    }
    let first = *by_year.keys().next().expect("nonempty");
    let last = *by_year.keys().next_back().expect("nonempty");
    let years: Vec<i32> = (first..=last).collect();

    let global = if options.global_vocab {
        Some(TfMatrix::build(corpus, tokenizer, options.orders, 1)?)
    } else {
        None
    };

    let per_year: Vec<(u64, Option<f64>, Option<f64>)> = years
        .par_iter()
        .map(|y| {
            let Some(articles) = by_year.get(y) else {
                return Ok((0, None, None));
            };
            let volume = articles.len() as u64;
            let sentiment = compensated_sum(articles.iter().map(|a| article_polarity(a, lexicon, tokenizer)))
                / articles.len() as f64;
            let mnc_value = if articles.len() < 2 {
                None
            } else {
                let result = match &global {
                    Some(tf) => {
                        let rows: Vec<Vec<u32>> = articles
                            .iter()
                            .map(|a| tf.dense_row(tf.row_index(&a.id).expect("article in global matrix")))
                            .collect();
                        let ids = articles.iter().map(|a| a.id.clone()).collect();
                        mnc(&TfMatrix::from_dense(tf.vocab().to_vec(), ids, &rows))
                    }
                    None => {
                        let year_corpus = Corpus::new(articles.iter().map(|&a| a.clone()).collect())?;
                        corpus_mnc(&year_corpus, tokenizer, options.orders)
                    }
                };
                match result {
                    Ok(r) => Some(r.mnc),
                    Err(CycleError::TooFewArticles(_)) | Err(CycleError::Corpus(CorpusError::EmptyVocabulary)) => None,
                    Err(e) => return Err(e),
                }
            };
            Ok((volume, Some(sentiment), mnc_value))
        })
        .collect::<Result<_, CycleError>>()?;

    Ok(AnnualFeatureSeries {
        topic: topic.to_string(),
        volume: per_year.iter().map(|p| p.0).collect(),
        mean_sentiment: per_year.iter().map(|p| p.1).collect(),
        mnc: per_year.iter().map(|p| p.2).collect(),
        legislative: legislative_years.map(|ly| years.iter().map(|y| ly.contains(y)).collect()),
        years,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleState {
    Quiescent,
    Active,
}

/// Active when both volume and MNC are strictly above their series
/// medians; a year without MNC is quiescent.
pub fn classify_cycle_state(series: &AnnualFeatureSeries, year: i32) -> Result<CycleState, CycleError> {
    let i = series.year_index(year).ok_or(CycleError::YearNotInSeries(year))?;
    let volumes: Vec<f64> = series.volume.iter().map(|&v| v as f64).collect();
    let mncs: Vec<f64> = series.mnc.iter().flatten().copied().collect();
    let (Some(vol_median), Some(mnc_median), Some(mnc_i)) = (median(&volumes), median(&mncs), series.mnc[i]) else {
        return Ok(CycleState::Quiescent);
    };
    Ok(if volumes[i] > vol_median && mnc_i > mnc_median {
        CycleState::Active
    } else {
        CycleState::Quiescent
    })
}
