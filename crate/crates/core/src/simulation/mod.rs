//! Hierarchical simulation: individual counterfactual distributions drawn
//! from a Dirichlet, scores derived from them, and binomial noise standing in
//! for an imperfect learner.

pub mod benchmark;
pub mod population;
pub mod sampler;
pub mod stats;
pub mod sweep;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use benchmark::{
    run_benchmark, BenchmarkProtocol, BenchmarkReport, QuantitySummary, RunRecord, SamplingLaw,
};
pub use population::{sample_population, SimulatedPopulation, SimulationParams};
pub use sweep::{sensitivity_sweep, SweepAxis, SweepBase, SweepPoint, SweepSeries};

use crate::estimation::{point_estimates, theoretical_bias};
use crate::Result;

/// Bias of the point estimators measured with exact scores, where the
/// learner covariance term vanishes and only the dependency term remains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactBiasStudy {
    pub expected_phi: f64,
    /// `estimate - truth` per replicate, indexed like `CounterfactualQuantity::ALL`.
    pub biases: Vec<[f64; 4]>,
}

impl ExactBiasStudy {
    pub fn mean_bias(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|k| stats::mean(&self.column(k)))
    }

    pub fn std_error(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|k| stats::std_error(&self.column(k)))
    }

    fn column(&self, k: usize) -> Vec<f64> {
        self.biases.iter().map(|b| b[k]).collect()
    }
}

/// Repeats the simulation `replicates` times and records the bias of the four
/// point estimators computed from the exact scores.
pub fn exact_score_bias_study(
    dirichlet: [f64; 4],
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<ExactBiasStudy> {
    let base = SimulationParams {
        n,
        v: 1,
        dirichlet,
        seed,
    };
    base.validate()?;
    let [a, b, c, d] = dirichlet;
    let biases = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = sampler::stream_rng(seed, r as u64);
            let pop = population::sample_with(&base, &mut rng);
            let est = point_estimates(&pop.true_scores).dist.to_array();
            let truth = pop.truth.to_array();
            [0, 1, 2, 3].map(|k| est[k] - truth[k])
        })
        .collect();
    Ok(ExactBiasStudy {
        expected_phi: theoretical_bias(a, b, c, d)?,
        biases,
    })
}
