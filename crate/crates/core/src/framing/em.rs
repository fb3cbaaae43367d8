//! Two-component one-dimensional Gaussian mixture fitted by EM.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::FramingError;

const MAX_ITERS: usize = 200;
const LOGLIK_TOL: f64 = 1e-10;
const VARIANCE_FLOOR: f64 = 1e-6;

/// Component 0 has the lower mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoGaussianMixture {
    pub weights: [f64; 2],
    pub means: [f64; 2],
    pub variances: [f64; 2],
    pub log_likelihood: f64,
    pub iterations: usize,
}

fn log_density(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (TAU * var).ln() - (x - mean).powi(2) / (2.0 * var)
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl TwoGaussianMixture {
    fn weighted_log_density(&self, c: usize, x: f64) -> f64 {
        self.weights[c].ln() + log_density(x, self.means[c], self.variances[c])
    }

    /// Posterior probability that `x` belongs to component 1.
    pub fn responsibility_high(&self, x: f64) -> f64 {
        let l0 = self.weighted_log_density(0, x);
        let l1 = self.weighted_log_density(1, x);
        (l1 - log_sum_exp(l0, l1)).exp()
    }

    /// The point between the means where both posteriors are equal.
    pub fn boundary(&self) -> Result<f64, FramingError> {
        let f = |x: f64| self.weighted_log_density(0, x) - self.weighted_log_density(1, x);
        let (mut lo, mut hi) = (self.means[0], self.means[1]);
        let (f_lo, f_hi) = (f(lo), f(hi));
        if !(f_lo > 0.0 && f_hi < 0.0) {
            return Err(FramingError::NoBoundary);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Fit by EM, initialised from a two-centre k-means seeded at the
/// minimum and maximum score.
pub fn fit_two_gaussians(scores: &[f64]) -> Result<TwoGaussianMixture, FramingError> {
    if scores.len() < 4 {
        return Err(FramingError::TooFewScores(scores.len()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(FramingError::NoConvergence);
    }
    let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max - min <= 0.0 {
        return Err(FramingError::DegenerateScores);
    }
    let n = scores.len() as f64;

    // k-means initialisation
    let mut centres = [min, max];
    let mut assign = vec![0usize; scores.len()];
    for _ in 0..100 {
        let mut changed = false;
        for (a, &x) in assign.iter_mut().zip(scores) {
            let c = usize::from((x - centres[1]).abs() < (x - centres[0]).abs());
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        for (c, centre) in centres.iter_mut().enumerate() {
            let members: Vec<f64> = scores.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(&x, _)| x).collect();
            if !members.is_empty() {
                *centre = members.iter().sum::<f64>() / members.len() as f64;
            }
        }
        if !changed {
            break;
        }
    }
    let mut model = TwoGaussianMixture {
        weights: [0.5; 2],
        means: centres,
        variances: [VARIANCE_FLOOR; 2],
        log_likelihood: f64::NEG_INFINITY,
        iterations: 0,
    };
    for c in 0..2 {
        let members: Vec<f64> = scores.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(&x, _)| x).collect();
        let count = members.len().max(1) as f64;
        model.weights[c] = count / n;
        model.variances[c] = (members.iter().map(|x| (x - centres[c]).powi(2)).sum::<f64>() / count).max(VARIANCE_FLOOR);
    }
    let total_w: f64 = model.weights.iter().sum();
    model.weights.iter_mut().for_each(|w| *w /= total_w);

    let mut resp = vec![0.0; scores.len()];
    for iter in 1..=MAX_ITERS {
        // E step
        let mut loglik = 0.0;
        for (r, &x) in resp.iter_mut().zip(scores) {
            let l0 = model.weighted_log_density(0, x);
            let l1 = model.weighted_log_density(1, x);
            let z = log_sum_exp(l0, l1);
            loglik += z;
            *r = (l1 - z).exp();
        }
        if !loglik.is_finite() {
            return Err(FramingError::NoConvergence);
        }
        let delta = loglik - model.log_likelihood;
        model.log_likelihood = loglik;
        model.iterations = iter;
        if delta.abs() < LOGLIK_TOL {
            break;
        }
        // M step
        let n1: f64 = resp.iter().sum();
        let n0 = n - n1;
        if n0 <= f64::EPSILON || n1 <= f64::EPSILON {
            return Err(FramingError::NoConvergence);
        }
        let m0 = scores.iter().zip(&resp).map(|(x, r)| (1.0 - r) * x).sum::<f64>() / n0;
        let m1 = scores.iter().zip(&resp).map(|(x, r)| r * x).sum::<f64>() / n1;
        let v0 = scores.iter().zip(&resp).map(|(x, r)| (1.0 - r) * (x - m0).powi(2)).sum::<f64>() / n0;
        let v1 = scores.iter().zip(&resp).map(|(x, r)| r * (x - m1).powi(2)).sum::<f64>() / n1;
        model.weights = [n0 / n, n1 / n];
        model.means = [m0, m1];
        model.variances = [v0.max(VARIANCE_FLOOR), v1.max(VARIANCE_FLOOR)];
    }

    if model.means[0] > model.means[1] {
        model.weights.swap(0, 1);
        model.means.swap(0, 1);
        model.variances.swap(0, 1);
    }
    Ok(model)
}

/// Decision threshold between the two fitted score populations.
pub fn em_threshold(scores: &[f64]) -> Result<f64, FramingError> {
    fit_two_gaussians(scores)?.boundary()
}
