//! Co-occurrence embeddings, word mover's distance between keywords,
//! similarity scores and 2D coordinates for plotting.

mod cooccurrence;
mod svd;
mod wmd;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cooccurrence::{CooccurrenceMatrix, VocabLimit};
pub use svd::{truncated_svd, Svd, SvdMethod};
pub use wmd::{min_cost_assignment, uniform_transport_cost};

use crate::corpus::NGram;
use crate::keywords::KeywordSet;
use crate::stats::{compensated_sum, median};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SemanticsError {
    #[error("co-occurrence vocabulary is empty")]
    EmptyVocabulary,
    #[error("co-occurrence window must be at least 1")]
    ZeroWindow,
    #[error("expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("co-occurrence table is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("rank {k} outside 1..={max}")]
    InvalidRank { k: usize, max: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("SVD did not converge (residual {residual:e})")]
    ConvergenceFailure { residual: f64 },
    #[error("token {0:?} is not in the embedding vocabulary")]
    OutOfVocabulary(String),
    #[error("distance {0} is negative")]
    NegativeDistance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Raw,
    #[default]
    Ppmi,
}

/// Vocabulary tokens as rows of `U_j Σ_j` from a truncated SVD.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingSpace {
    vocab: Vec<String>,
    vectors: Vec<Vec<f64>>,
    singular_values: Vec<f64>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl EmbeddingSpace {
    /// Build a space from explicit vectors (all of equal dimension).
    pub fn from_vectors(entries: Vec<(String, Vec<f64>)>) -> Self {
        let singular_values = vec![1.0; entries.first().map_or(0, |e| e.1.len())];
        let (vocab, vectors): (Vec<String>, Vec<Vec<f64>>) = entries.into_iter().unzip();
        Self::assemble(vocab, vectors, singular_values)
    }

    fn assemble(vocab: Vec<String>, vectors: Vec<Vec<f64>>, singular_values: Vec<f64>) -> Self {
        let index = vocab.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { vocab, vectors, singular_values, index }
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.singular_values.len()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn vector(&self, token: &str) -> Result<&[f64], SemanticsError> {
        self.index
            .get(token)
            .map(|&i| self.vectors[i].as_slice())
            .ok_or_else(|| SemanticsError::OutOfVocabulary(token.to_string()))
    }

    fn points(&self, ngram: &NGram) -> Result<Vec<&[f64]>, SemanticsError> {
        ngram.tokens().iter().map(|t| self.vector(t)).collect()
    }
}

/// Embed a co-occurrence table into `j` dimensions.
pub fn embed(
    cooc: &CooccurrenceMatrix,
    j: usize,
    weighting: Weighting,
    method: SvdMethod,
) -> Result<EmbeddingSpace, SemanticsError> {
    let v = cooc.len();
    let matrix = match weighting {
        Weighting::Raw => cooc.counts().to_vec(),
        Weighting::Ppmi => cooc.ppmi(),
    };
    let svd = truncated_svd(&matrix, v, v, j, method)?;
    let vectors = (0..v)
        .map(|i| (0..j).map(|c| svd.u_at(i, c) * svd.singular_values[c]).collect())
        .collect();
    Ok(EmbeddingSpace::assemble(cooc.vocab().to_vec(), vectors, svd.singular_values))
}

/// Word mover's distance between the token multisets of two n-grams,
/// each token carrying equal mass, with Euclidean ground cost.
pub fn wmd(a: &NGram, b: &NGram, space: &EmbeddingSpace) -> Result<f64, SemanticsError> {
    let pa = space.points(a)?;
    let pb = space.points(b)?;
    Ok(uniform_transport_cost(&pa, &pb))
}

/// Map a distance to `(0, 1]` as `1 / (1 + d)`.
pub fn similarity(distance: f64) -> Result<f64, SemanticsError> {
    if distance < 0.0 || distance.is_nan() {
        return Err(SemanticsError::NegativeDistance(distance));
    }
    Ok(1.0 / (1.0 + distance))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordPair {
    pub a: NGram,
    pub b: NGram,
    pub wmd: f64,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordDistanceReport {
    pub pairs: Vec<KeywordPair>,
    pub mean_similarity: f64,
    pub median_wmd: f64,
}

/// Distances between every unordered pair of keywords, in keyword order.
pub fn pairwise_report(
    keywords: &KeywordSet,
    space: &EmbeddingSpace,
) -> Result<KeywordDistanceReport, SemanticsError> {
    let ngrams: Vec<&NGram> = keywords.ngrams().collect();
    pairwise_report_for(&ngrams, space)
}

pub fn pairwise_report_for(
    ngrams: &[&NGram],
    space: &EmbeddingSpace,
) -> Result<KeywordDistanceReport, SemanticsError> {
    let index_pairs: Vec<(usize, usize)> = (0..ngrams.len())
        .flat_map(|i| (i + 1..ngrams.len()).map(move |j| (i, j)))
        .collect();
    let pairs = index_pairs
        .par_iter()
        .map(|&(i, j)| {
            let d = wmd(ngrams[i], ngrams[j], space)?;
            Ok(KeywordPair {
                a: ngrams[i].clone(),
                b: ngrams[j].clone(),
                wmd: d,
                similarity: similarity(d)?,
            })
        })
        .collect::<Result<Vec<_>, SemanticsError>>()?;

    let (mean_similarity, median_wmd) = if pairs.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let distances: Vec<f64> = pairs.iter().map(|p| p.wmd).collect();
        (
            compensated_sum(pairs.iter().map(|p| p.similarity)) / pairs.len() as f64,
            median(&distances).unwrap_or(f64::NAN),
        )
    };
    Ok(KeywordDistanceReport { pairs, mean_similarity, median_wmd })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point2d {
    pub ngram: NGram,
    pub x: f64,
    pub y: f64,
}

/// First two embedding coordinates of each keyword's mean token vector.
/// A one-dimensional space yields `y = 0`.
pub fn project_2d<'a, I>(space: &EmbeddingSpace, keywords: I) -> Result<Vec<Point2d>, SemanticsError>
where
    I: IntoIterator<Item = &'a NGram>,
{
    keywords
        .into_iter()
        .map(|ngram| {
            let pts = space.points(ngram)?;
            let n = pts.len() as f64;
            let coord = |c: usize| {
                if c < space.dim() {
                    pts.iter().map(|p| p[c]).sum::<f64>() / n
                } else {
                    0.0
                }
            };
            Ok(Point2d { ngram: ngram.clone(), x: coord(0), y: coord(1) })
        })
        .collect()
}
