//! Randomized benchmark comparing the uplift bounds, the Fréchet bounds, the
//! point estimator and the two bound midpoints against simulated truth.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::population::{sample_with, SimulationParams};
use super::sampler::{stream_rng, uniform_simplex};
use super::stats::{mean, rmse};
use crate::estimation::{midpoint_estimates, phi_individual_mean, theoretical_bias};
use crate::model::{conditional_entropy, CounterfactualQuantity, Interval};
use crate::{Error, Result};

/// How a parameter is drawn from its range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingLaw {
    Uniform,
    LogUniform,
    /// Uniform in the square root of the parameter.
    SqrtUniform,
}

impl SamplingLaw {
    pub fn sample<R: RngCore>(self, rng: &mut R, lo: f64, hi: f64) -> f64 {
        let u: f64 = rng.random();
        match self {
            SamplingLaw::Uniform => lo + u * (hi - lo),
            SamplingLaw::LogUniform => (lo.ln() + u * (hi.ln() - lo.ln())).exp(),
            SamplingLaw::SqrtUniform => {
                let (a, b) = (lo.sqrt(), hi.sqrt());
                let r = a + u * (b - a);
                r * r
            }
        }
    }

    /// Integer draw in `lo..=hi`. The uniform law picks each integer with equal
    /// probability; the others round a continuous draw.
    pub fn sample_int<R: RngCore>(self, rng: &mut R, lo: u64, hi: u64) -> u64 {
        match self {
            SamplingLaw::Uniform => rng.random_range(lo..=hi),
            _ => (self.sample(rng, lo as f64, hi as f64).round() as u64).clamp(lo, hi),
        }
    }
}

/// Ranges and sampling laws of the randomized benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkProtocol {
    pub runs: usize,
    pub n_range: (usize, usize),
    pub v_range: (u32, u32),
    /// Range of the Dirichlet concentration `A = a + b + c + d`.
    pub a_range: (f64, f64),
    pub n_law: SamplingLaw,
    pub v_law: SamplingLaw,
    pub a_law: SamplingLaw,
    pub seed: u64,
}

impl Default for BenchmarkProtocol {
    fn default() -> Self {
        BenchmarkProtocol {
            runs: 5000,
            n_range: (10, 10_000),
            v_range: (5, 50),
            a_range: (0.1, 15.0),
            n_law: SamplingLaw::LogUniform,
            v_law: SamplingLaw::Uniform,
            a_law: SamplingLaw::SqrtUniform,
            seed: 0,
        }
    }
}

impl BenchmarkProtocol {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.n_range.0 == 0 || self.n_range.0 > self.n_range.1 {
            return bad("n range must satisfy 1 <= min <= max");
        }
        if self.v_range.0 == 0 || self.v_range.0 > self.v_range.1 {
            return bad("v range must satisfy 1 <= min <= max");
        }
        let (lo, hi) = self.a_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad("concentration range must satisfy 0 < min <= max");
        }
        Ok(())
    }
}

/// Everything recorded about one benchmark run. Arrays are indexed like
/// [`CounterfactualQuantity::ALL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    pub n: usize,
    pub v: u32,
    pub concentration: f64,
    pub simplex: [f64; 4],
    pub population_seed: u64,
    /// `(ad - bc) / (A (A + 1))` for this run's weights.
    pub expected_phi: f64,
    /// Mean of `alpha_i delta_i - beta_i gamma_i` in the sampled population.
    pub sample_phi: f64,
    pub conditional_entropy: f64,
    pub truth: [f64; 4],
    pub point: [f64; 4],
    pub uplift: [Interval<f64>; 4],
    pub frechet: [Interval<f64>; 4],
    pub uplift_midpoint: [f64; 4],
    pub frechet_midpoint: [f64; 4],
}

/// Identification error for one quantity, aggregated over runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantitySummary {
    pub quantity: CounterfactualQuantity,
    pub mean_uplift_width: f64,
    pub mean_frechet_width: f64,
    pub rmse_point: f64,
    pub rmse_uplift_midpoint: f64,
    pub rmse_frechet_midpoint: f64,
    /// Share of runs whose truth lies in the uplift interval from noisy scores.
    pub uplift_coverage: f64,
    pub frechet_coverage: f64,
}

/// Averages over runs whose true value falls into one bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub quantity: CounterfactualQuantity,
    pub bin_lower: f64,
    pub bin_upper: f64,
    pub count: usize,
    pub mean_truth: f64,
    pub mean_point: f64,
    pub mean_uplift_lower: f64,
    pub mean_uplift_upper: f64,
    pub mean_frechet_lower: f64,
    pub mean_frechet_upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub protocol: BenchmarkProtocol,
    pub records: Vec<RunRecord>,
    pub summaries: [QuantitySummary; 4],
}

impl BenchmarkReport {
    pub fn summary(&self, q: CounterfactualQuantity) -> &QuantitySummary {
        &self.summaries[q.index()]
    }

    /// Equal-width bins over the true value of `q`, dropping bins with fewer
    /// than `min_count` runs.
    pub fn strata(&self, q: CounterfactualQuantity, bins: usize, min_count: usize) -> Vec<Stratum> {
        let k = q.index();
        let mut groups: Vec<Vec<&RunRecord>> = vec![Vec::new(); bins];
        for r in &self.records {
            let b = ((r.truth[k] * bins as f64) as usize).min(bins - 1);
            groups[b].push(r);
        }
        groups
            .iter()
            .enumerate()
            .filter(|(_, g)| !g.is_empty() && g.len() >= min_count)
            .map(|(b, g)| {
                let avg = |f: &dyn Fn(&RunRecord) -> f64| {
                    g.iter().map(|r| f(r)).sum::<f64>() / g.len() as f64
                };
                Stratum {
                    quantity: q,
                    bin_lower: b as f64 / bins as f64,
                    bin_upper: (b + 1) as f64 / bins as f64,
                    count: g.len(),
                    mean_truth: avg(&|r| r.truth[k]),
                    mean_point: avg(&|r| r.point[k]),
                    mean_uplift_lower: avg(&|r| r.uplift[k].lower),
                    mean_uplift_upper: avg(&|r| r.uplift[k].upper),
                    mean_frechet_lower: avg(&|r| r.frechet[k].lower),
                    mean_frechet_upper: avg(&|r| r.frechet[k].upper),
                }
            })
            .collect()
    }

    /// Histogram of the per-run expected bias `(ad - bc) / (A (A + 1))` over
    /// `[-0.25, 0.25]`.
    pub fn phi_histogram(&self, bins: usize) -> Vec<HistogramBin> {
        let (lo, hi) = (-0.25, 0.25);
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for r in &self.records {
            let b = (((r.expected_phi - lo) / width) as isize).clamp(0, bins as isize - 1);
            counts[b as usize] += 1;
        }
        counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| HistogramBin {
                lower: lo + i as f64 * width,
                upper: lo + (i + 1) as f64 * width,
                count,
            })
            .collect()
    }
}

fn run_once(protocol: &BenchmarkProtocol, index: usize) -> RunRecord {
    let mut rng = stream_rng(protocol.seed, index as u64);
    let (nlo, nhi) = protocol.n_range;
    let n = protocol.n_law.sample_int(&mut rng, nlo as u64, nhi as u64) as usize;
    let (vlo, vhi) = protocol.v_range;
    let v = protocol
        .v_law
        .sample_int(&mut rng, u64::from(vlo), u64::from(vhi)) as u32;
    let concentration = protocol
        .a_law
        .sample(&mut rng, protocol.a_range.0, protocol.a_range.1);
    let simplex = uniform_simplex(&mut rng);
    let population_seed = rng.next_u64();
    let dirichlet = simplex.map(|p| concentration * p);
    let params = SimulationParams {
        n,
        v,
        dirichlet,
        seed: population_seed,
    };
    let mut pop_rng = stream_rng(population_seed, 0);
    let pop = sample_with(&params, &mut pop_rng);
    let report = pop.noisy_report();
    let [a, b, c, d] = dirichlet;
    RunRecord {
        index,
        n,
        v,
        concentration,
        simplex,
        population_seed,
        expected_phi: theoretical_bias(a, b, c, d).expect("positive weights"),
        sample_phi: phi_individual_mean(&pop.dists).expect("nonempty"),
        conditional_entropy: conditional_entropy(&pop.dists).expect("nonempty"),
        truth: pop.truth.to_array(),
        point: report.point.dist.to_array(),
        uplift: report.uplift_intervals,
        frechet: report.frechet_intervals,
        uplift_midpoint: midpoint_estimates(&report.uplift_intervals),
        frechet_midpoint: midpoint_estimates(&report.frechet_intervals),
    }
}

fn summarize(records: &[RunRecord], q: CounterfactualQuantity) -> QuantitySummary {
    let k = q.index();
    let widths = |f: &dyn Fn(&RunRecord) -> Interval<f64>| {
        mean(&records.iter().map(|r| f(r).width()).collect::<Vec<_>>())
    };
    let coverage = |f: &dyn Fn(&RunRecord) -> Interval<f64>| {
        records.iter().filter(|r| f(r).contains(r.truth[k])).count() as f64 / records.len() as f64
    };
    QuantitySummary {
        quantity: q,
        mean_uplift_width: widths(&|r| r.uplift[k]),
        mean_frechet_width: widths(&|r| r.frechet[k]),
        rmse_point: rmse(records.iter().map(|r| r.point[k] - r.truth[k])),
        rmse_uplift_midpoint: rmse(records.iter().map(|r| r.uplift_midpoint[k] - r.truth[k])),
        rmse_frechet_midpoint: rmse(records.iter().map(|r| r.frechet_midpoint[k] - r.truth[k])),
        uplift_coverage: coverage(&|r| r.uplift[k]),
        frechet_coverage: coverage(&|r| r.frechet[k]),
    }
}

/// Runs the benchmark. Runs are generated from independent streams of the
/// protocol seed and may execute on the current rayon pool in any order; the
/// report is identical for any thread count.
pub fn run_benchmark(protocol: &BenchmarkProtocol) -> Result<BenchmarkReport> {
    protocol.validate()?;
    let records: Vec<RunRecord> = (0..protocol.runs)
        .into_par_iter()
        .map(|i| run_once(protocol, i))
        .collect();
    let summaries = CounterfactualQuantity::ALL.map(|q| summarize(&records, q));
    Ok(BenchmarkReport {
        protocol: *protocol,
        records,
        summaries,
    })
}
