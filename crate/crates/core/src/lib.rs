//! Bounds and point estimates for the four counterfactual outcome
//! probabilities of a binary treatment, computed from the two scores
//! `s0(x) = P(Y = 1 | x, no treatment)` and `s1(x) = P(Y = 1 | x, treatment)`.
//!
//! The numeric core ([`model`], [`estimation`], [`profit`]) is generic over
//! [`Real`]; the aliases below fix the scalar for common use.

pub mod error;
pub mod estimation;
pub mod ingest;
pub mod model;
pub mod profit;
pub mod scalar;
pub mod simulation;

pub use error::{Error, Result};
pub use estimation::pipeline::{
    run_algorithm_one, run_algorithm_one_detailed, AlgorithmRun, SplitSpec,
};
pub use estimation::{
    midpoint_estimates, phi_population, point_estimates, theoretical_bias, BiasReport,
    EstimationReport, PointEstimate,
};
pub use model::{
    conditional_entropy, frechet_bounds, frechet_bounds_all, frechet_span, pointwise_bounds,
    uplift_bounds, uplift_bounds_all, uplift_bounds_span, CounterfactualDistribution,
    CounterfactualQuantity, Interval, ScorePair, ScoreSet,
};
pub use profit::{ProfitInputs, ProfitReport};
pub use scalar::Real;

pub type Distribution = CounterfactualDistribution<f64>;
pub type Scores = ScoreSet<f64>;
pub type Pair = ScorePair<f64>;
pub type Bound = Interval<f64>;
pub type Report = EstimationReport<f64>;

pub type Distribution32 = CounterfactualDistribution<f32>;
pub type Scores32 = ScoreSet<f32>;
pub type Pair32 = ScorePair<f32>;
pub type Bound32 = Interval<f32>;
pub type Report32 = EstimationReport<f32>;
