use serde::{Deserialize, Serialize};

use super::sampler::{binomial, categorical4, stream_rng, Dirichlet4, SimRng};
use crate::estimation::EstimationReport;
use crate::model::{CounterfactualDistribution, ScorePair, ScoreSet};
use crate::{Error, Result};

/// Parameters of one simulated population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationParams {
    /// Size of the evaluation set.
    pub n: usize,
    /// Binomial trials behind each noisy score; the score variance is `s (1 - s) / v`.
    pub v: u32,
    /// Dirichlet weights `(a, b, c, d)` of the individual distributions.
    pub dirichlet: [f64; 4],
    pub seed: u64,
}

impl SimulationParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter(
                "population size must be at least 1".into(),
            ));
        }
        if self.v == 0 {
            return Err(Error::InvalidParameter("v must be at least 1".into()));
        }
        Dirichlet4::new(self.dirichlet).map(|_| ())
    }

    /// Weights `A * p` for a simplex point `p` and concentration `A`.
    pub fn weights_from(concentration: f64, simplex: &CounterfactualDistribution<f64>) -> [f64; 4] {
        simplex.to_array().map(|x| concentration * x)
    }
}

/// One realization of the generative process.
///
/// Individual `i` gets a distribution drawn from the Dirichlet, exact scores
/// `s0 = beta + delta` and `s1 = gamma + delta`, noisy scores
/// `Binomial(v, s) / v` drawn independently for each arm, and a potential
/// outcome pair drawn from its own distribution.
#[derive(Debug, Clone)]
pub struct SimulatedPopulation {
    pub params: SimulationParams,
    pub dists: Vec<CounterfactualDistribution<f64>>,
    pub true_scores: ScoreSet<f64>,
    pub noisy_scores: ScoreSet<f64>,
    /// Realized `(Y0, Y1)` per individual.
    pub outcomes: Vec<(bool, bool)>,
    /// Componentwise mean of the individual distributions.
    pub truth: CounterfactualDistribution<f64>,
}

impl SimulatedPopulation {
    /// Estimator report from the noisy scores.
    pub fn noisy_report(&self) -> EstimationReport<f64> {
        EstimationReport::from_scores(&self.noisy_scores).expect("simulated scores are valid")
    }

    /// Estimator report from the exact scores.
    pub fn exact_report(&self) -> EstimationReport<f64> {
        EstimationReport::from_scores(&self.true_scores).expect("simulated scores are valid")
    }

    /// Empirical frequencies of the realized outcome pairs, in
    /// `(alpha, beta, gamma, delta)` order.
    pub fn realized_frequencies(&self) -> [f64; 4] {
        let mut counts = [0usize; 4];
        for &(y0, y1) in &self.outcomes {
            counts[outcome_index(y0, y1)] += 1;
        }
        counts.map(|c| c as f64 / self.outcomes.len() as f64)
    }
}

fn outcome_index(y0: bool, y1: bool) -> usize {
    match (y0, y1) {
        (false, false) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (true, true) => 3,
    }
}

pub(crate) fn outcome_pair(index: usize) -> (bool, bool) {
    match index {
        0 => (false, false),
        1 => (true, false),
        2 => (false, true),
        _ => (true, true),
    }
}

/// Samples a population; the result depends only on `params`.
pub fn sample_population(params: &SimulationParams) -> Result<SimulatedPopulation> {
    params.validate()?;
    let mut rng = stream_rng(params.seed, 0);
    Ok(sample_with(params, &mut rng))
}

pub(crate) fn sample_with(params: &SimulationParams, rng: &mut SimRng) -> SimulatedPopulation {
    let dirichlet = Dirichlet4::new(params.dirichlet).expect("validated");
    let v = params.v;
    let vf = f64::from(v);
    let mut dists = Vec::with_capacity(params.n);
    let mut exact = Vec::with_capacity(params.n);
    let mut noisy = Vec::with_capacity(params.n);
    let mut outcomes = Vec::with_capacity(params.n);
    let mut sums = [0.0f64; 4];
    for _ in 0..params.n {
        let p = dirichlet.sample(rng);
        let d = CounterfactualDistribution::from_array_unchecked(p);
        let s = d.scores();
        let h0 = f64::from(binomial(rng, v, s.s0)) / vf;
        let h1 = f64::from(binomial(rng, v, s.s1)) / vf;
        let y = outcome_pair(categorical4(rng, &p));
        for (acc, x) in sums.iter_mut().zip(p) {
            *acc += x;
        }
        dists.push(d);
        exact.push(s);
        noisy.push(ScorePair { s0: h0, s1: h1 });
        outcomes.push(y);
    }
    let n = params.n as f64;
    SimulatedPopulation {
        params: *params,
        dists,
        true_scores: ScoreSet::new(exact).expect("n >= 1"),
        noisy_scores: ScoreSet::new(noisy).expect("n >= 1"),
        outcomes,
        truth: CounterfactualDistribution::from_array_unchecked(sums.map(|x| x / n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, v: u32, w: [f64; 4], seed: u64) -> SimulationParams {
        SimulationParams {
            n,
            v,
            dirichlet: w,
            seed,
        }
    }

    #[test]
    fn validation() {
        assert!(sample_population(&params(0, 10, [1.0; 4], 1)).is_err());
        assert!(sample_population(&params(5, 0, [1.0; 4], 1)).is_err());
        assert!(sample_population(&params(5, 10, [1.0, 0.0, 1.0, 1.0], 1)).is_err());
    }

    #[test]
    fn score_identities_and_lattice() {
        let pop = sample_population(&params(2000, 7, [0.5, 1.0, 2.0, 0.3], 9)).unwrap();
        for ((d, s), h) in pop
            .dists
            .iter()
            .zip(pop.true_scores.iter())
            .zip(pop.noisy_scores.iter())
        {
            assert_eq!(s.s0, (d.beta + d.delta).min(1.0));
            assert_eq!(s.s1, (d.gamma + d.delta).min(1.0));
            for x in [h.s0, h.s1] {
                let k = x * 7.0;
                assert!((k - k.round()).abs() < 1e-12 && (0.0..=1.0).contains(&x));
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let p = params(500, 10, [2.0, 1.0, 1.0, 2.0], 42);
        let a = sample_population(&p).unwrap();
        let b = sample_population(&p).unwrap();
        assert_eq!(a.dists, b.dists);
        assert_eq!(a.noisy_scores, b.noisy_scores);
        assert_eq!(a.outcomes, b.outcomes);
    }

    #[test]
    fn concentrated_population_is_all_sure_things() {
        let pop = sample_population(&params(1000, 10, [1e6, 1.0, 1.0, 1.0], 3)).unwrap();
        assert!(pop.dists.iter().all(|d| d.alpha > 0.9999));
        assert!(pop.outcomes.iter().all(|&y| y == (false, false)));
    }

    #[test]
    fn realized_frequencies_track_truth() {
        let pop = sample_population(&params(50_000, 10, [2.0, 1.0, 1.0, 2.0], 11)).unwrap();
        let f = pop.realized_frequencies();
        for (x, t) in f.iter().zip(pop.truth.to_array()) {
            assert!((x - t).abs() < 0.01);
        }
    }
}
