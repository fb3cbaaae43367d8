//! Framing-change decisions from keyword distance reports.

mod em;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use em::{em_threshold, fit_two_gaussians, TwoGaussianMixture};

use crate::corpus::{Corpus, DateRange, Tokenizer};
use crate::keywords::{top_k_keywords, KeywordConfig, KeywordError, KeywordSet};
use crate::semantics::{
    embed, pairwise_report, project_2d, CooccurrenceMatrix, KeywordDistanceReport, Point2d,
    SemanticsError, SvdMethod, VocabLimit, Weighting,
};
use crate::stats::median;

/// Threshold applied to mean keyword similarity in the reported case studies.
pub const DEFAULT_THRESHOLD: f64 = 0.15;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FramingError {
    #[error("distance report has no keyword pairs")]
    EmptyReport,
    #[error("EM threshold needs at least 4 scores, got {0}")]
    TooFewScores(usize),
    #[error("all calibration scores are equal")]
    DegenerateScores,
    #[error("EM did not converge")]
    NoConvergence,
    #[error("fitted components have no equal-posterior point between their means")]
    NoBoundary,
    #[error("{0:?} threshold needs calibration scores")]
    MissingCalibration(ThresholdMode),
    #[error("period {0} corpus is empty")]
    EmptyCorpus(u8),
    #[error("the two periods overlap")]
    OverlappingPeriods,
    #[error(transparent)]
    Keywords(#[from] KeywordError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// Mean pairwise similarity; high means a coherent new framing.
    #[default]
    MeanSimilarity,
    /// Median pairwise distance; low means a coherent new framing.
    MedianDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    #[default]
    Fixed,
    Median,
    Em,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Significant,
    NotSignificant,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Significant => "significant",
            Decision::NotSignificant => "not_significant",
        })
    }
}

pub fn framing_score(report: &KeywordDistanceReport, mode: ScoreMode) -> Result<f64, FramingError> {
    if report.pairs.is_empty() {
        return Err(FramingError::EmptyReport);
    }
    Ok(match mode {
        ScoreMode::MeanSimilarity => {
            report.pairs.iter().map(|p| p.similarity).sum::<f64>() / report.pairs.len() as f64
        }
        ScoreMode::MedianDistance => {
            let d: Vec<f64> = report.pairs.iter().map(|p| p.wmd).collect();
            median(&d).ok_or(FramingError::EmptyReport)?
        }
    })
}

/// Compare a score with a threshold; equality counts as significant.
pub fn classify_change(score: f64, threshold: f64, mode: ScoreMode) -> Decision {
    let significant = match mode {
        ScoreMode::MeanSimilarity => score >= threshold,
        ScoreMode::MedianDistance => score <= threshold,
    };
    if significant {
        Decision::Significant
    } else {
        Decision::NotSignificant
    }
}

/// Resolve the numeric threshold: the fixed value, or the median / EM
/// boundary of a caller-supplied pool of topic scores.
pub fn resolve_threshold(mode: ThresholdMode, fixed: f64, calibration: &[f64]) -> Result<f64, FramingError> {
    match mode {
        ThresholdMode::Fixed => Ok(fixed),
        ThresholdMode::Median => median(calibration).ok_or(FramingError::MissingCalibration(mode)),
        ThresholdMode::Em if calibration.is_empty() => Err(FramingError::MissingCalibration(mode)),
        ThresholdMode::Em => em_threshold(calibration),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FramingConfig {
    pub keywords: KeywordConfig,
    pub j: usize,
    pub window: usize,
    pub weighting: Weighting,
    pub max_vocab: Option<usize>,
    pub score_mode: ScoreMode,
    pub threshold_mode: ThresholdMode,
    pub threshold: f64,
    pub calibration_scores: Vec<f64>,
}

impl Default for FramingConfig {
    fn default() -> Self {
        Self {
            keywords: KeywordConfig::default(),
            j: 3,
            window: 5,
            weighting: Weighting::Ppmi,
            max_vocab: Some(2000),
            score_mode: ScoreMode::MeanSimilarity,
            threshold_mode: ThresholdMode::Fixed,
            threshold: DEFAULT_THRESHOLD,
            calibration_scores: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FramingReport {
    pub topic: String,
    pub period_pair: (Option<DateRange>, Option<DateRange>),
    pub keyword_set: KeywordSet,
    pub distances: KeywordDistanceReport,
    pub coordinates: Vec<Point2d>,
    pub score: f64,
    pub score_mode: ScoreMode,
    pub threshold: f64,
    pub threshold_mode: ThresholdMode,
    pub decision: Decision,
    pub config: FramingConfig,
}

impl FramingReport {
    pub fn summary_line(&self) -> String {
        format!(
            "topic={} score={:.6} threshold={:.6} decision={}",
            self.topic, self.score, self.threshold, self.decision
        )
    }
}

/// Keywords, embedding, pairwise distances, score and decision for one
/// pair of period corpora.
pub fn detect_framing_change(
    topic: &str,
    t1: &Corpus,
    t2: &Corpus,
    tokenizer: &Tokenizer,
    config: &FramingConfig,
) -> Result<FramingReport, FramingError> {
    let (p1, p2) = match (t1.period(), t2.period()) {
        (None, _) => return Err(FramingError::EmptyCorpus(1)),
        (_, None) => return Err(FramingError::EmptyCorpus(2)),
        (Some(a), Some(b)) => (a, b),
    };
    if p1.overlaps(&p2) {
        return Err(FramingError::OverlappingPeriods);
    }
    let threshold = resolve_threshold(config.threshold_mode, config.threshold, &config.calibration_scores)?;

    let keyword_set = top_k_keywords(t1, t2, tokenizer, &config.keywords)?;
    let required: BTreeSet<String> =
        keyword_set.ngrams().flat_map(|g| g.tokens().iter().cloned()).collect();
    let combined = t1.union(t2).map_err(KeywordError::from)?;
    let cooc = CooccurrenceMatrix::build(
        &combined,
        tokenizer,
        config.window,
        &VocabLimit { max_vocab: config.max_vocab, required },
    )?;
    let space = embed(&cooc, config.j, config.weighting, SvdMethod::Auto)?;
    let distances = pairwise_report(&keyword_set, &space)?;
    let coordinates = project_2d(&space, keyword_set.ngrams())?;
    let score = framing_score(&distances, config.score_mode)?;
    let decision = classify_change(score, threshold, config.score_mode);

    Ok(FramingReport {
        topic: topic.to_string(),
        period_pair: (Some(p1), Some(p2)),
        keyword_set,
        distances,
        coordinates,
        score,
        score_mode: config.score_mode,
        threshold,
        threshold_mode: config.threshold_mode,
        decision,
        config: config.clone(),
    })
}
