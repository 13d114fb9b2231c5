//! Point estimates under conditional independence of the potential outcomes,
//! the dependency term `phi` that drives their bias, and the combined report.

pub mod pipeline;

use serde::{Deserialize, Serialize};

use crate::model::{
    frechet_bounds_all, frechet_span, uplift_bounds_all, uplift_bounds_span,
    CounterfactualDistribution, CounterfactualQuantity, Interval, ScorePair, ScoreSet,
};
use crate::scalar::Real;
use crate::{Error, Result};

/// Plug-in estimate of `(alpha, beta, gamma, delta)` from a score set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate<T> {
    pub dist: CounterfactualDistribution<T>,
    pub n_samples: usize,
}

/// Means of the independence products
/// `(1 - s0)(1 - s1)`, `s0 (1 - s1)`, `(1 - s0) s1` and `s0 s1`.
///
/// The four products sum to one for every pair, so the estimate lies on the
/// simplex up to rounding.
pub fn point_estimates<T: Real>(scores: &ScoreSet<T>) -> PointEstimate<T> {
    let one = T::one();
    let mut acc = [T::zero(); 4];
    for p in scores.iter() {
        let (c0, c1) = (one - p.s0, one - p.s1);
        acc[0] = acc[0] + c0 * c1;
        acc[1] = acc[1] + p.s0 * c1;
        acc[2] = acc[2] + c0 * p.s1;
        acc[3] = acc[3] + p.s0 * p.s1;
    }
    let n = T::from_usize(scores.len()).expect("length fits");
    PointEstimate {
        dist: CounterfactualDistribution::from_array_unchecked(acc.map(|x| x / n)),
        n_samples: scores.len(),
    }
}

/// Midpoints of a family of four intervals, the naive baseline estimator.
pub fn midpoint_estimates<T: Real>(intervals: &[Interval<T>; 4]) -> [T; 4] {
    intervals.map(|i| i.midpoint())
}

/// Population covariance (divide by `N`) of `s0` and `s1` over a score set.
pub fn score_covariance<T: Real>(scores: &ScoreSet<T>) -> T {
    let m = scores.mean_scores();
    scores.mean_of(|p| (p.s0 - m.s0) * (p.s1 - m.s1))
}

fn mean_distribution<T: Real>(dists: &[CounterfactualDistribution<T>]) -> [T; 4] {
    let n = T::from_usize(dists.len()).expect("length fits");
    let mut acc = [T::zero(); 4];
    for d in dists {
        for (a, x) in acc.iter_mut().zip(d.to_array()) {
            *a = *a + x;
        }
    }
    acc.map(|x| x / n)
}

fn implied_scores<T: Real>(dists: &[CounterfactualDistribution<T>]) -> ScoreSet<T> {
    let pairs: Vec<ScorePair<T>> = dists.iter().map(|d| d.scores()).collect();
    ScoreSet::new(pairs).expect("caller checked nonempty")
}

/// Population dependency term `alpha delta - beta gamma - cov(s0, s1)`, with
/// the population quantities taken as means over individuals and the scores
/// implied by each individual's distribution.
pub fn phi_population<T: Real>(dists: &[CounterfactualDistribution<T>]) -> Result<T> {
    if dists.is_empty() {
        return Err(Error::EmptyCollection);
    }
    let [a, b, c, d] = mean_distribution(dists);
    let cov = score_covariance(&implied_scores(dists));
    Ok(a * d - b * c - cov)
}

/// Mean over individuals of `alpha_i delta_i - beta_i gamma_i`, which equals
/// the per-individual gap `s0 (1 - s1) - beta`.
pub fn phi_individual_mean<T: Real>(dists: &[CounterfactualDistribution<T>]) -> Result<T> {
    if dists.is_empty() {
        return Err(Error::EmptyCollection);
    }
    let n = T::from_usize(dists.len()).expect("length fits");
    Ok(dists
        .iter()
        .map(|d| d.alpha * d.delta - d.beta * d.gamma)
        .sum::<T>()
        / n)
}

/// Expected dependency term under `Dirichlet(a, b, c, d)`:
/// `(ad - bc) / (A (A + 1))` with `A = a + b + c + d`.
pub fn theoretical_bias<T: Real>(a: T, b: T, c: T, d: T) -> Result<T> {
    for w in [a, b, c, d] {
        if w.is_nan() || w <= T::zero() || !w.is_finite() {
            return Err(Error::Domain {
                what: "Dirichlet weight",
                value: w.as_f64(),
            });
        }
    }
    let total = a + b + c + d;
    Ok((a * d - b * c) / (total * (total + T::one())))
}

/// Large-sample bias of the point estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasReport<T> {
    pub phi_mean: T,
    pub cov_scores: T,
    /// Mean over individuals of the covariance of the two estimated scores
    /// across training sets. Absent unless it was resampled.
    pub model_cov_term: Option<T>,
    pub bias_beta: T,
}

impl<T: Real> BiasReport<T> {
    pub fn new(dists: &[CounterfactualDistribution<T>], model_cov_term: Option<T>) -> Result<Self> {
        let phi_mean = phi_population(dists)?;
        let cov_scores = score_covariance(&implied_scores(dists));
        let bias_beta = phi_mean - model_cov_term.unwrap_or_else(T::zero);
        Ok(BiasReport {
            phi_mean,
            cov_scores,
            model_cov_term,
            bias_beta,
        })
    }

    /// Bias of the estimator of `q`: `+bias_beta` for beta and gamma,
    /// `-bias_beta` for alpha and delta.
    pub fn bias(&self, q: CounterfactualQuantity) -> T {
        match q {
            CounterfactualQuantity::Beta | CounterfactualQuantity::Gamma => self.bias_beta,
            CounterfactualQuantity::Alpha | CounterfactualQuantity::Delta => -self.bias_beta,
        }
    }
}

/// Point estimates together with both bound families for all four quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport<T> {
    pub point: PointEstimate<T>,
    pub uplift_intervals: [Interval<T>; 4],
    pub frechet_intervals: [Interval<T>; 4],
    pub mean_scores: ScorePair<T>,
    pub uplift_span: T,
    pub frechet_span: T,
}

impl<T: Real> EstimationReport<T> {
    pub fn from_scores(scores: &ScoreSet<T>) -> Result<Self> {
        let mean_scores = scores.mean_scores();
        Ok(EstimationReport {
            point: point_estimates(scores),
            uplift_intervals: uplift_bounds_all(scores),
            frechet_intervals: frechet_bounds_all(mean_scores.s0, mean_scores.s1)?,
            mean_scores,
            uplift_span: uplift_bounds_span(scores),
            frechet_span: frechet_span(mean_scores.s0, mean_scores.s1)?,
        })
    }

    pub fn uplift(&self, q: CounterfactualQuantity) -> Interval<T> {
        self.uplift_intervals[q.index()]
    }

    pub fn frechet(&self, q: CounterfactualQuantity) -> Interval<T> {
        self.frechet_intervals[q.index()]
    }

    pub fn estimate(&self, q: CounterfactualQuantity) -> T {
        self.point.dist.get(q)
    }
}
