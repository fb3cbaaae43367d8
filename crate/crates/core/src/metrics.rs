//! Evaluation metrics: precision, recall, F1, accuracy and Cohen's kappa.

use std::collections::BTreeMap;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("confusion counts are all zero")]
    EmptyCounts,
    #[error("rating lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no ratings supplied")]
    NoRatings,
}

/// Binary confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    /// Tally paired (actual, predicted) booleans.
    pub fn from_pairs<I: IntoIterator<Item = (bool, bool)>>(pairs: I) -> Self {
        let mut c = Self::default();
        for (actual, predicted) in pairs {
            c.record(actual, predicted);
        }
        c
    }

    pub fn record(&mut self, actual: bool, predicted: bool) {
        match (actual, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
        self.tn += rhs.tn;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1.
///
/// Zero denominators: with no predicted positives, precision is 1 when
/// there were also no missed positives and 0 otherwise; with no actual
/// positives, recall is 1. F1 is 0 when precision and recall are both 0.
pub fn prf1(c: &ConfusionCounts) -> Prf1 {
    let precision = if c.tp + c.fp == 0 {
        if c.fn_ == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        c.tp as f64 / (c.tp + c.fp) as f64
    };
    let recall = if c.tp + c.fn_ == 0 {
        1.0
    } else {
        c.tp as f64 / (c.tp + c.fn_) as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Prf1 { precision, recall, f1 }
}

pub fn accuracy(c: &ConfusionCounts) -> Result<f64, MetricsError> {
    match c.total() {
        0 => Err(MetricsError::EmptyCounts),
        n => Ok((c.tp + c.tn) as f64 / n as f64),
    }
}

/// Cohen's kappa between two raters over the same items.
///
/// Chance agreement is the sum over categories of the product of the two
/// raters' marginal frequencies. When chance agreement is 1 (both raters
/// used one identical category throughout) kappa is 1.
pub fn cohens_kappa<T: Ord>(codes_a: &[T], codes_b: &[T]) -> Result<f64, MetricsError> {
    if codes_a.len() != codes_b.len() {
        return Err(MetricsError::LengthMismatch(codes_a.len(), codes_b.len()));
    }
    if codes_a.is_empty() {
        return Err(MetricsError::NoRatings);
    }
    let n = codes_a.len() as f64;
    let mut marginals: BTreeMap<&T, (u64, u64)> = BTreeMap::new();
    let mut agree = 0u64;
    for (a, b) in codes_a.iter().zip(codes_b) {
        marginals.entry(a).or_default().0 += 1;
        marginals.entry(b).or_default().1 += 1;
        if a == b {
            agree += 1;
        }
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = marginals
        .values()
        .map(|&(ca, cb)| (ca as f64 / n) * (cb as f64 / n))
        .sum();
    if (1.0 - p_e).abs() < f64::EPSILON {
        // a single shared category; agreement is necessarily perfect
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
