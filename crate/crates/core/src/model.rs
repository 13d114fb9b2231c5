//! Counterfactual probability types and the two bound families.
//!
//! Notation: `s0 = P(Y0 = 1 | X)` is the outcome probability without
//! treatment and `s1 = P(Y1 = 1 | X)` the one with treatment. The uplift is
//! `s0 - s1` (positive when the treatment lowers the outcome rate, as in churn
//! prevention). Some uplift libraries use `s1 - s0`; this crate never does.
//!
//! The four joint probabilities of the potential outcomes are
//!
//! | quantity | event              | customer category |
//! |----------|--------------------|-------------------|
//! | `alpha`  | `Y0 = 0, Y1 = 0`   | sure thing        |
//! | `beta`   | `Y0 = 1, Y1 = 0`   | persuadable       |
//! | `gamma`  | `Y0 = 0, Y1 = 1`   | do-not-disturb    |
//! | `delta`  | `Y0 = 1, Y1 = 1`   | lost cause        |
//!
//! Fréchet bounds use only the two marginal rates. Uplift bounds average the
//! pointwise Fréchet expressions over individual score pairs, which by
//! Jensen's inequality is never looser.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::{checked_probability, Real};
use crate::{Error, Result};

/// One of the four joint potential-outcome probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CounterfactualQuantity {
    Alpha,
    Beta,
    Gamma,
    Delta,
}

impl CounterfactualQuantity {
    pub const ALL: [CounterfactualQuantity; 4] = [
        CounterfactualQuantity::Alpha,
        CounterfactualQuantity::Beta,
        CounterfactualQuantity::Gamma,
        CounterfactualQuantity::Delta,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            CounterfactualQuantity::Alpha => "alpha",
            CounterfactualQuantity::Beta => "beta",
            CounterfactualQuantity::Gamma => "gamma",
            CounterfactualQuantity::Delta => "delta",
        }
    }

    /// Customer category used in churn prevention.
    pub fn category(self) -> &'static str {
        match self {
            CounterfactualQuantity::Alpha => "sure thing",
            CounterfactualQuantity::Beta => "persuadable",
            CounterfactualQuantity::Gamma => "do-not-disturb",
            CounterfactualQuantity::Delta => "lost cause",
        }
    }
}

impl fmt::Display for CounterfactualQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Joint distribution of `(Y0, Y1)`, a point on the 4-simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualDistribution<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
}

impl<T: Real> CounterfactualDistribution<T> {
    pub fn new(alpha: T, beta: T, gamma: T, delta: T) -> Result<Self> {
        Self::from_array([alpha, beta, gamma, delta])
    }

    pub fn from_array(p: [T; 4]) -> Result<Self> {
        let mut sum = T::zero();
        for (q, &x) in CounterfactualQuantity::ALL.iter().zip(p.iter()) {
            if x.is_nan() || x < T::zero() || x > T::one() {
                return Err(Error::InvalidDistribution(format!(
                    "{q} = {x} is not a probability"
                )));
            }
            sum = sum + x;
        }
        if (sum - T::one()).abs() > T::lit(T::SIMPLEX_TOL) {
            return Err(Error::InvalidDistribution(format!(
                "components sum to {sum}, expected 1"
            )));
        }
        Ok(Self::from_array_unchecked(p))
    }

    /// Rescales a nonnegative vector onto the simplex.
    pub fn normalized(p: [T; 4]) -> Result<Self> {
        if p.iter().any(|x| x.is_nan() || *x < T::zero()) {
            return Err(Error::InvalidDistribution(
                "cannot normalize a vector with negative entries".into(),
            ));
        }
        let sum: T = p.iter().copied().sum();
        if !(sum.is_finite() && sum > T::zero()) {
            return Err(Error::InvalidDistribution(format!(
                "cannot normalize a vector summing to {sum}"
            )));
        }
        Ok(Self::from_array_unchecked(p.map(|x| x / sum)))
    }

    pub(crate) fn from_array_unchecked(p: [T; 4]) -> Self {
        CounterfactualDistribution {
            alpha: p[0],
            beta: p[1],
            gamma: p[2],
            delta: p[3],
        }
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    pub fn get(&self, q: CounterfactualQuantity) -> T {
        self.to_array()[q.index()]
    }

    /// Marginal outcome probabilities: `s0 = beta + delta`, `s1 = gamma + delta`.
    pub fn scores(&self) -> ScorePair<T> {
        let one = T::one();
        ScorePair {
            s0: (self.beta + self.delta).min(one),
            s1: (self.gamma + self.delta).min(one),
        }
    }

    /// Shannon entropy in nats with `0 ln 0 = 0`.
    pub fn entropy(&self) -> T {
        self.to_array()
            .iter()
            .filter(|&&p| p > T::zero())
            .map(|&p| -p * p.ln())
            .sum()
    }
}

/// Estimated outcome probabilities of one individual under control (`s0`)
/// and under treatment (`s1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePair<T> {
    pub s0: T,
    pub s1: T,
}

impl<T: Real> ScorePair<T> {
    /// Validates both scores; values within the snapping slack of `[0, 1]` are
    /// moved onto the boundary.
    pub fn new(s0: T, s1: T) -> Result<Self> {
        Ok(ScorePair {
            s0: checked_probability("s0", s0)?,
            s1: checked_probability("s1", s1)?,
        })
    }

    /// `s0 - s1`.
    pub fn uplift(&self) -> T {
        self.s0 - self.s1
    }
}

/// A nonempty evaluation set of score pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreSet<T> {
    pairs: Vec<ScorePair<T>>,
}

impl<T: Real> ScoreSet<T> {
    pub fn new(pairs: Vec<ScorePair<T>>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyScoreSet);
        }
        Ok(ScoreSet { pairs })
    }

    /// Builds a set from raw `(s0, s1)` tuples, validating each.
    pub fn from_tuples<I>(it: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, T)>,
    {
        let pairs = it
            .into_iter()
            .map(|(a, b)| ScorePair::new(a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[ScorePair<T>] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = &ScorePair<T>> {
        self.pairs.iter()
    }

    pub(crate) fn mean_of(&self, f: impl Fn(&ScorePair<T>) -> T) -> T {
        let n = T::from_usize(self.pairs.len()).expect("length fits");
        self.pairs.iter().map(f).sum::<T>() / n
    }

    /// Mean scores `(mean s0, mean s1)`, the plug-in marginal rates.
    pub fn mean_scores(&self) -> ScorePair<T> {
        ScorePair {
            s0: self.mean_of(|p| p.s0).min(T::one()),
            s1: self.mean_of(|p| p.s1).min(T::one()),
        }
    }
}

/// Lower and upper bound on one counterfactual probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub quantity: CounterfactualQuantity,
    pub lower: T,
    pub upper: T,
}

impl<T: Real> Interval<T> {
    pub fn new(quantity: CounterfactualQuantity, lower: T, upper: T) -> Result<Self> {
        let lower = checked_probability("interval lower bound", lower)?;
        let upper = checked_probability("interval upper bound", upper)?;
        if lower > upper {
            return Err(Error::InvalidParameter(format!(
                "interval for {quantity} has lower {lower} > upper {upper}"
            )));
        }
        Ok(Interval {
            quantity,
            lower,
            upper,
        })
    }

    pub fn width(&self) -> T {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> T {
        (self.lower + self.upper) / T::lit(2.0)
    }

    pub fn contains(&self, x: T) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// True when `other` lies inside `self` up to `tol`.
    pub fn encloses(&self, other: &Interval<T>, tol: T) -> bool {
        self.lower <= other.lower + tol && other.upper <= self.upper + tol
    }
}

/// The Fréchet expressions for one quantity evaluated at `(s0, s1)`.
///
/// Applied to marginal rates this gives the Fréchet bounds; averaged over
/// individual score pairs it gives the uplift bounds.
pub fn pointwise_bounds<T: Real>(s0: T, s1: T, q: CounterfactualQuantity) -> (T, T) {
    let zero = T::zero();
    let one = T::one();
    match q {
        CounterfactualQuantity::Alpha => ((one - s0 - s1).max(zero), (one - s0).min(one - s1)),
        CounterfactualQuantity::Beta => ((s0 - s1).max(zero), s0.min(one - s1)),
        CounterfactualQuantity::Gamma => ((s1 - s0).max(zero), (one - s0).min(s1)),
        CounterfactualQuantity::Delta => ((s0 + s1 - one).max(zero), s0.min(s1)),
    }
}

fn min4<T: Real>(s0: T, s1: T) -> T {
    let one = T::one();
    s0.min(s1).min(one - s0).min(one - s1)
}

/// Fréchet bounds on `q` from the marginal outcome rates.
pub fn frechet_bounds<T: Real>(
    s0_mean: T,
    s1_mean: T,
    q: CounterfactualQuantity,
) -> Result<Interval<T>> {
    let s0 = checked_probability("s0 mean", s0_mean)?;
    let s1 = checked_probability("s1 mean", s1_mean)?;
    let (lower, upper) = pointwise_bounds(s0, s1, q);
    Ok(Interval {
        quantity: q,
        lower,
        upper,
    })
}

/// Fréchet bounds for all four quantities, indexed like [`CounterfactualQuantity::ALL`].
pub fn frechet_bounds_all<T: Real>(s0_mean: T, s1_mean: T) -> Result<[Interval<T>; 4]> {
    let s0 = checked_probability("s0 mean", s0_mean)?;
    let s1 = checked_probability("s1 mean", s1_mean)?;
    Ok(CounterfactualQuantity::ALL.map(|q| {
        let (lower, upper) = pointwise_bounds(s0, s1, q);
        Interval {
            quantity: q,
            lower,
            upper,
        }
    }))
}

/// Width of every Fréchet interval: `min{s0, s1, 1 - s0, 1 - s1}`.
pub fn frechet_span<T: Real>(s0_mean: T, s1_mean: T) -> Result<T> {
    let s0 = checked_probability("s0 mean", s0_mean)?;
    let s1 = checked_probability("s1 mean", s1_mean)?;
    Ok(min4(s0, s1))
}

/// Uplift bounds on `q`: empirical means of the pointwise lower and upper
/// Fréchet expressions over the score set.
pub fn uplift_bounds<T: Real>(scores: &ScoreSet<T>, q: CounterfactualQuantity) -> Interval<T> {
    let n = T::from_usize(scores.len()).expect("length fits");
    let (lo, hi) = scores
        .iter()
        .map(|p| pointwise_bounds(p.s0, p.s1, q))
        .fold((T::zero(), T::zero()), |(a, b), (l, u)| (a + l, b + u));
    Interval {
        quantity: q,
        lower: lo / n,
        upper: hi / n,
    }
}

/// Uplift bounds for all four quantities.
pub fn uplift_bounds_all<T: Real>(scores: &ScoreSet<T>) -> [Interval<T>; 4] {
    CounterfactualQuantity::ALL.map(|q| uplift_bounds(scores, q))
}

/// Common width of the four uplift intervals, `mean min{s0, s1, 1 - s0, 1 - s1}`.
pub fn uplift_bounds_span<T: Real>(scores: &ScoreSet<T>) -> T {
    scores.mean_of(|p| min4(p.s0, p.s1))
}

/// Mean per-individual entropy of `(Y0, Y1)` in nats, in `[0, ln 4]`.
pub fn conditional_entropy<T: Real>(dists: &[CounterfactualDistribution<T>]) -> Result<T> {
    if dists.is_empty() {
        return Err(Error::EmptyCollection);
    }
    let n = T::from_usize(dists.len()).expect("length fits");
    Ok(dists.iter().map(|d| d.entropy()).sum::<T>() / n)
}
