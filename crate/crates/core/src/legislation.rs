//! Predict years of legislative activity from how annual news-cycle
//! features change between consecutive years.
//!
//! Each feature is reduced to a series of normalized absolute annual
//! differences. Consecutive pairs `(x1, x2)` of those values are binned
//! into a per-feature joint table; conditionals `P_f(x2 | x1)` from the
//! tables are multiplied across features under a naive Bayes assumption.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{accuracy, prf1, ConfusionCounts, MetricsError, Prf1};
use crate::newscycle::AnnualFeatureSeries;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LegislationError {
    #[error("need at least {needed} years, got {got}")]
    TooFewYears { needed: usize, got: usize },
    #[error("no consecutive pairs to train on")]
    NoTrainingPairs,
    #[error("bins must be at least 2, got {0}")]
    InvalidBins(usize),
    #[error("alpha must be finite and non-negative, got {0}")]
    InvalidAlpha(f64),
    #[error("threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("feature {feature} has no mass in row {x1}")]
    EmptyRow { feature: usize, x1: usize },
    #[error("bin {bin} out of range for {bins} bins")]
    BinOutOfRange { bin: usize, bins: usize },
    #[error("value {0} outside [0, 1]")]
    ValueOutOfRange(f64),
    #[error("series disagree on feature lists")]
    FeatureMismatch,
    #[error("leave-one-out needs at least 2 topics, got {0}")]
    TooFewTopics(usize),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Volume,
    MeanSentiment,
    Mnc,
}

impl Feature {
    pub const ALL: [Feature; 3] = [Feature::Volume, Feature::MeanSentiment, Feature::Mnc];

    fn values(self, series: &AnnualFeatureSeries) -> Vec<Option<f64>> {
        match self {
            Feature::Volume => series.volume.iter().map(|&v| Some(v as f64)).collect(),
            Feature::MeanSentiment => series.mean_sentiment.clone(),
            Feature::Mnc => series.mnc.clone(),
        }
    }
}

/// What the paired observations are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeInput {
    /// Normalized absolute differences between consecutive years.
    #[default]
    Differences,
    /// Feature values min-max scaled to `[0, 1]` over the series.
    RawValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDiffSeries {
    pub topic: String,
    pub years: Vec<i32>,
    pub features: Vec<Feature>,
    /// `values[f][i]` is feature `f` in `years[i]`, in `[0, 1]`.
    pub values: Vec<Vec<f64>>,
    /// Set where a missing feature value was read as 0.
    pub missing: Vec<Vec<bool>>,
    pub legislative: Vec<bool>,
    pub input: ChangeInput,
}

impl FeatureDiffSeries {
    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    /// The `(x1, x2)` pair for each feature at position `i`. The first
    /// position has no predecessor and is paired with `x1 = 0`.
    pub fn pair_at(&self, i: usize) -> Vec<(f64, f64)> {
        self.values
            .iter()
            .map(|v| (if i == 0 { 0.0 } else { v[i - 1] }, v[i]))
            .collect()
    }
}

fn scale_by_max(values: &mut [f64]) {
    let max = values.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter_mut().for_each(|v| *v /= max);
    }
}

/// `|f_y - f_{y-1}|` for each feature, divided by its largest value.
pub fn normalized_annual_diffs(series: &AnnualFeatureSeries) -> Result<FeatureDiffSeries, LegislationError> {
    let n = series.years.len();
    if n < 2 {
        return Err(LegislationError::TooFewYears { needed: 2, got: n });
    }
    let mut values = Vec::new();
    let mut missing = Vec::new();
    for f in Feature::ALL {
        let raw = f.values(series);
        let mut d: Vec<f64> = raw.windows(2).map(|w| (w[1].unwrap_or(0.0) - w[0].unwrap_or(0.0)).abs()).collect();
        scale_by_max(&mut d);
        values.push(d);
        missing.push(raw.windows(2).map(|w| w[0].is_none() || w[1].is_none()).collect());
    }
    let legislative = match &series.legislative {
        Some(l) => l[1..].to_vec(),
        None => vec![false; n - 1],
    };
    Ok(FeatureDiffSeries {
        topic: series.topic.clone(),
        years: series.years[1..].to_vec(),
        features: Feature::ALL.to_vec(),
        values,
        missing,
        legislative,
        input: ChangeInput::Differences,
    })
}

/// Feature values min-max scaled per feature, one entry per year.
pub fn scaled_annual_values(series: &AnnualFeatureSeries) -> Result<FeatureDiffSeries, LegislationError> {
    let n = series.years.len();
    if n < 2 {
        return Err(LegislationError::TooFewYears { needed: 2, got: n });
    }
    let mut values = Vec::new();
    let mut missing = Vec::new();
    for f in Feature::ALL {
        let raw = f.values(series);
        let filled: Vec<f64> = raw.iter().map(|v| v.unwrap_or(0.0)).collect();
        let lo = filled.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = filled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        values.push(filled.iter().map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 }).collect());
        missing.push(raw.iter().map(Option::is_none).collect());
    }
    Ok(FeatureDiffSeries {
        topic: series.topic.clone(),
        years: series.years.clone(),
        features: Feature::ALL.to_vec(),
        values,
        missing,
        legislative: series.legislative.clone().unwrap_or_else(|| vec![false; n]),
        input: ChangeInput::RawValues,
    })
}

pub fn change_series(series: &AnnualFeatureSeries, input: ChangeInput) -> Result<FeatureDiffSeries, LegislationError> {
    match input {
        ChangeInput::Differences => normalized_annual_diffs(series),
        ChangeInput::RawValues => scaled_annual_values(series),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorMode {
    /// Fit on years without legislation; flag changes that are improbable.
    #[default]
    Anomaly,
    /// One table per class, compared by posterior.
    ClassConditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LegislationParams {
    pub bins: usize,
    pub alpha: f64,
    pub mode: PredictorMode,
    pub t: f64,
}

impl Default for LegislationParams {
    fn default() -> Self {
        Self { bins: 5, alpha: 1.0, mode: PredictorMode::Anomaly, t: 0.05 }
    }
}

impl LegislationParams {
    fn validate(&self) -> Result<(), LegislationError> {
        if self.bins < 2 {
            return Err(LegislationError::InvalidBins(self.bins));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(LegislationError::InvalidAlpha(self.alpha));
        }
        if !(self.t > 0.0 && self.t < 1.0) {
            return Err(LegislationError::InvalidThreshold(self.t));
        }
        Ok(())
    }
}

/// `B + 1` equal-width edges over `[0, 1]`.
pub fn bin_edges(bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| i as f64 / bins as f64).collect()
}

/// Equal-width bin of a value in `[0, 1]`; 1.0 falls in the last bin.
pub fn bin_index(value: f64, bins: usize) -> Result<usize, LegislationError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(LegislationError::ValueOutOfRange(value));
    }
    Ok(((value * bins as f64).floor() as usize).min(bins - 1))
}

/// Conditional `P(x2 | x1)` from a `B × B` joint table (row `x1`), taken
/// through the per-feature normalized distribution: each entry is first
/// divided by the table total, then by the sum over `x2` of the row.
pub fn table_conditional(table: &[f64], bins: usize, x1: usize, x2: usize) -> Result<f64, LegislationError> {
    check_bins(bins, x1, x2)?;
    let total: f64 = table.iter().sum();
    let row = &table[x1 * bins..(x1 + 1) * bins];
    if total <= 0.0 || row.iter().all(|&c| c <= 0.0) {
        return Err(LegislationError::EmptyRow { feature: 0, x1 });
    }
    let p: Vec<f64> = row.iter().map(|c| c / total).collect();
    Ok(p[x2] / p.iter().sum::<f64>())
}

/// The same conditional as a plain row normalization of counts.
pub fn table_conditional_direct(table: &[f64], bins: usize, x1: usize, x2: usize) -> Result<f64, LegislationError> {
    check_bins(bins, x1, x2)?;
    let row = &table[x1 * bins..(x1 + 1) * bins];
    let mass: f64 = row.iter().sum();
    if mass <= 0.0 {
        return Err(LegislationError::EmptyRow { feature: 0, x1 });
    }
    Ok(row[x2] / mass)
}

fn check_bins(bins: usize, x1: usize, x2: usize) -> Result<(), LegislationError> {
    for bin in [x1, x2] {
        if bin >= bins {
            return Err(LegislationError::BinOutOfRange { bin, bins });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegislationModel {
    pub features: Vec<Feature>,
    pub input: ChangeInput,
    pub bins: usize,
    pub bin_edges: Vec<f64>,
    /// Smoothed `B × B` tables, row `x1`, one per feature.
    pub joint: Vec<Vec<f64>>,
    /// Per-class tables `[not legislative, legislative]` (class-conditional mode).
    pub class_joint: Option<[Vec<Vec<f64>>; 2]>,
    pub class_priors: Option<[f64; 2]>,
    pub alpha: f64,
    pub mode: PredictorMode,
    pub t: f64,
    pub training_pairs: usize,
    pub warnings: Vec<String>,
}

fn empty_tables(features: usize, bins: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; bins * bins]; features]
}

/// Fit joint change tables over consecutive pairs of every series.
pub fn fit_model(data: &[FeatureDiffSeries], params: &LegislationParams) -> Result<LegislationModel, LegislationError> {
    params.validate()?;
    let first = data.first().ok_or(LegislationError::NoTrainingPairs)?;
    if data.iter().any(|s| s.features != first.features || s.input != first.input) {
        return Err(LegislationError::FeatureMismatch);
    }
    let (nf, b) = (first.features.len(), params.bins);
    let mut per_class = [empty_tables(nf, b), empty_tables(nf, b)];
    let mut class_pairs = [0usize; 2];
    for s in data {
        for i in 1..s.len() {
            let class = usize::from(s.legislative[i]);
            class_pairs[class] += 1;
            for (f, v) in s.values.iter().enumerate() {
                let (x1, x2) = (bin_index(v[i - 1], b)?, bin_index(v[i], b)?);
                per_class[class][f][x1 * b + x2] += 1.0;
            }
        }
    }

    let trained = match params.mode {
        PredictorMode::Anomaly => class_pairs[0],
        PredictorMode::ClassConditional => class_pairs[0] + class_pairs[1],
    };
    if trained == 0 {
        return Err(LegislationError::NoTrainingPairs);
    }
    let smooth = |tables: &[Vec<f64>]| -> Vec<Vec<f64>> {
        tables.iter().map(|t| t.iter().map(|c| c + params.alpha).collect()).collect()
    };
    let joint = match params.mode {
        PredictorMode::Anomaly => smooth(&per_class[0]),
        PredictorMode::ClassConditional => {
            let summed: Vec<Vec<f64>> = (0..nf)
                .map(|f| per_class[0][f].iter().zip(&per_class[1][f]).map(|(a, c)| a + c).collect())
                .collect();
            smooth(&summed)
        }
    };
    let (class_joint, class_priors) = match params.mode {
        PredictorMode::Anomaly => (None, None),
        PredictorMode::ClassConditional => {
            let n = trained as f64;
            (
                Some([smooth(&per_class[0]), smooth(&per_class[1])]),
                Some([class_pairs[0] as f64 / n, class_pairs[1] as f64 / n]),
            )
        }
    };

    let mut warnings = Vec::new();
    let mut check = |name: &str, tables: &[Vec<f64>]| {
        for (f, t) in tables.iter().enumerate() {
            for x1 in 0..b {
                if t[x1 * b..(x1 + 1) * b].iter().all(|&c| c <= 0.0) {
                    warnings.push(format!("{name} table for {:?} has no mass in row {x1}", first.features[f]));
                }
            }
        }
    };
    check("joint", &joint);
    if let Some([neg, pos]) = &class_joint {
        check("non-legislative", neg);
        check("legislative", pos);
    }

    Ok(LegislationModel {
        features: first.features.clone(),
        input: first.input,
        bins: b,
        bin_edges: bin_edges(b),
        joint,
        class_joint,
        class_priors,
        alpha: params.alpha,
        mode: params.mode,
        t: params.t,
        training_pairs: trained,
        warnings,
    })
}

impl LegislationModel {
    /// `P_f(x2 | x1)` for feature index `feature`.
    pub fn conditional(&self, feature: usize, x1: usize, x2: usize) -> Result<f64, LegislationError> {
        table_conditional(&self.joint[feature], self.bins, x1, x2).map_err(|e| with_feature(e, feature))
    }

    pub fn conditional_direct(&self, feature: usize, x1: usize, x2: usize) -> Result<f64, LegislationError> {
        table_conditional_direct(&self.joint[feature], self.bins, x1, x2).map_err(|e| with_feature(e, feature))
    }

    fn log_product(&self, tables: &[Vec<f64>], pairs: &[(f64, f64)]) -> Result<f64, LegislationError> {
        if pairs.len() != tables.len() {
            return Err(LegislationError::FeatureMismatch);
        }
        let mut log_p = 0.0;
        for (f, &(a, b)) in pairs.iter().enumerate() {
            let (x1, x2) = (bin_index(a, self.bins)?, bin_index(b, self.bins)?);
            log_p += table_conditional(&tables[f], self.bins, x1, x2).map_err(|e| with_feature(e, f))?.ln();
        }
        Ok(log_p)
    }

    /// `Π_f P_f(x2 | x1)` over the fitted joint tables.
    pub fn posterior(&self, pairs: &[(f64, f64)]) -> Result<f64, LegislationError> {
        Ok(self.log_product(&self.joint, pairs)?.exp())
    }

    /// Posterior probability of the legislative class (class-conditional mode).
    pub fn class_posterior(&self, pairs: &[(f64, f64)]) -> Option<Result<f64, LegislationError>> {
        let (Some([neg, pos]), Some(priors)) = (&self.class_joint, self.class_priors) else {
            return None;
        };
        Some((|| {
            let mut log = [f64::NEG_INFINITY; 2];
            for (c, tables) in [neg, pos].into_iter().enumerate() {
                if priors[c] > 0.0 {
                    log[c] = priors[c].ln() + self.log_product(tables, pairs)?;
                }
            }
            let m = log[0].max(log[1]);
            Ok((log[1] - m).exp() / ((log[0] - m).exp() + (log[1] - m).exp()))
        })())
    }

    /// The score the decision is made on and the decision itself.
    pub fn predict(&self, pairs: &[(f64, f64)]) -> Result<Prediction, LegislationError> {
        match self.mode {
            PredictorMode::Anomaly => {
                let p = self.posterior(pairs)?;
                Ok(Prediction { posterior: p, legislative: p < self.t })
            }
            PredictorMode::ClassConditional => {
                let p = self.class_posterior(pairs).ok_or(LegislationError::NoTrainingPairs)??;
                Ok(Prediction { posterior: p, legislative: p > 0.5 })
            }
        }
    }

    pub fn predict_series(&self, series: &FeatureDiffSeries) -> Result<Vec<YearPrediction>, LegislationError> {
        if series.features != self.features || series.input != self.input {
            return Err(LegislationError::FeatureMismatch);
        }
        (0..series.len())
            .map(|i| {
                let p = self.predict(&series.pair_at(i))?;
                Ok(YearPrediction {
                    topic: series.topic.clone(),
                    year: series.years[i],
                    posterior: p.posterior,
                    predicted: p.legislative,
                    actual: series.legislative[i],
                })
            })
            .collect()
    }
}

fn with_feature(e: LegislationError, feature: usize) -> LegislationError {
    match e {
        LegislationError::EmptyRow { x1, .. } => LegislationError::EmptyRow { feature, x1 },
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub posterior: f64,
    pub legislative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearPrediction {
    pub topic: String,
    pub year: i32,
    pub posterior: f64,
    pub predicted: bool,
    pub actual: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub counts: ConfusionCounts,
    pub scores: Prf1,
    pub accuracy: f64,
}

impl Evaluation {
    fn from_counts(counts: ConfusionCounts) -> Result<Self, LegislationError> {
        Ok(Self { scores: prf1(&counts), accuracy: accuracy(&counts)?, counts })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicEvaluation {
    pub topic: String,
    pub evaluation: Evaluation,
    pub predictions: Vec<YearPrediction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooReport {
    pub per_topic: Vec<TopicEvaluation>,
    /// Micro-averaged over every held-out year.
    pub overall: Evaluation,
}

/// Hold out each topic in turn, fit on the rest and predict its years.
pub fn loo_evaluate(data: &[FeatureDiffSeries], params: &LegislationParams) -> Result<LooReport, LegislationError> {
    if data.len() < 2 {
        return Err(LegislationError::TooFewTopics(data.len()));
    }
    let per_topic = (0..data.len())
        .into_par_iter()
        .map(|held| {
            let train: Vec<FeatureDiffSeries> =
                data.iter().enumerate().filter(|&(i, _)| i != held).map(|(_, s)| s.clone()).collect();
            let model = fit_model(&train, params)?;
            let predictions = model.predict_series(&data[held])?;
            let counts = ConfusionCounts::from_pairs(predictions.iter().map(|p| (p.actual, p.predicted)));
            Ok(TopicEvaluation { topic: data[held].topic.clone(), evaluation: Evaluation::from_counts(counts)?, predictions })
        })
        .collect::<Result<Vec<_>, LegislationError>>()?;
    let mut total = ConfusionCounts::default();
    for t in &per_topic {
        total += t.evaluation.counts;
    }
    Ok(LooReport { overall: Evaluation::from_counts(total)?, per_topic })
}
