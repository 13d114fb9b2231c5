//! One-parameter sensitivity sweeps around a fixed simplex point.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::population::{sample_with, SimulationParams};
use super::sampler::stream_rng;
use super::stats::{mean, std_dev};
use crate::estimation::theoretical_bias;
use crate::model::{
    conditional_entropy, uplift_bounds_span, CounterfactualDistribution, CounterfactualQuantity,
};
use crate::{Error, Result};

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Dirichlet concentration `A`.
    #[serde(rename = "A")]
    Concentration,
    /// Evaluation set size `N`.
    #[serde(rename = "N")]
    SampleSize,
    /// Binomial trials `v` of the noisy scores.
    #[serde(rename = "v")]
    Trials,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Concentration => "A",
            SweepAxis::SampleSize => "N",
            SweepAxis::Trials => "v",
        }
    }

    /// Default grid of the swept parameter.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepAxis::Concentration => vec![0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
            SweepAxis::SampleSize => vec![
                10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0, 10000.0, 20000.0,
            ],
            SweepAxis::Trials => vec![1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0],
        }
    }

    /// Fixed parameters used when sweeping this axis, at the churn point:
    /// `v = 50, N = 2000` for `A`; `v = 20, A = 1` for `N`; `N = 1000, A = 10` for `v`.
    pub fn default_base(self, seed: u64) -> SweepBase {
        let (concentration, n, v) = match self {
            SweepAxis::Concentration => (1.0, 2000, 50),
            SweepAxis::SampleSize => (1.0, 1000, 20),
            SweepAxis::Trials => (10.0, 1000, 20),
        };
        SweepBase {
            simplex: SweepBase::churn_point(),
            concentration,
            n,
            v,
            seed,
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(SweepAxis::Concentration),
            "N" | "n" => Ok(SweepAxis::SampleSize),
            "v" | "V" => Ok(SweepAxis::Trials),
            other => Err(Error::InvalidParameter(format!(
                "unknown sweep axis '{other}', expected A, N or v"
            ))),
        }
    }
}

/// Parameters held fixed while one of them is swept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepBase {
    /// Mean individual distribution; the Dirichlet weights are `A * simplex`.
    pub simplex: CounterfactualDistribution<f64>,
    pub concentration: f64,
    pub n: usize,
    pub v: u32,
    pub seed: u64,
}

impl SweepBase {
    /// The churn-like operating point `(0.947, 0.020, 0.017, 0.017)`, rescaled
    /// onto the simplex since it sums to 1.001.
    pub fn churn_point() -> CounterfactualDistribution<f64> {
        CounterfactualDistribution::normalized([0.947, 0.020, 0.017, 0.017]).expect("positive")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub conditional_entropy: f64,
    pub uplift_span: f64,
    /// `beta_hat - beta` from noisy scores.
    pub point_error: f64,
    /// Mean of `s (1 - s) / v` over both arms and all individuals.
    pub model_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub expected_phi: f64,
    pub mean_entropy: f64,
    pub sd_entropy: f64,
    pub mean_span: f64,
    pub sd_span: f64,
    pub mean_abs_error: f64,
    pub sd_abs_error: f64,
    pub mean_error: f64,
    pub mean_model_variance: f64,
    pub replicates: Vec<ReplicateRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub axis: SweepAxis,
    pub base: SweepBase,
    pub points: Vec<SweepPoint>,
}

impl SweepSeries {
    pub fn column(&self, f: impl Fn(&SweepPoint) -> f64) -> Vec<f64> {
        self.points.iter().map(f).collect()
    }
}

fn params_at(axis: SweepAxis, value: f64, base: &SweepBase) -> Result<SimulationParams> {
    let whole = |what: &str| -> Result<u64> {
        if value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
            Ok(value as u64)
        } else {
            Err(Error::InvalidParameter(format!(
                "{what} grid values must be positive integers, got {value}"
            )))
        }
    };
    let mut concentration = base.concentration;
    let mut n = base.n;
    let mut v = base.v;
    match axis {
        SweepAxis::Concentration => concentration = value,
        SweepAxis::SampleSize => n = whole("N")? as usize,
        SweepAxis::Trials => v = whole("v")? as u32,
    }
    let params = SimulationParams {
        n,
        v,
        dirichlet: SimulationParams::weights_from(concentration, &base.simplex),
        seed: base.seed,
    };
    params.validate()?;
    Ok(params)
}

fn replicate(params: &SimulationParams, seed: u64, g: usize, r: usize) -> ReplicateRecord {
    let mut rng = stream_rng(seed, ((g as u64) << 32) | r as u64);
    let pop = sample_with(params, &mut rng);
    let report = pop.noisy_report();
    let beta = CounterfactualQuantity::Beta;
    let vf = f64::from(params.v);
    let model_variance = pop
        .true_scores
        .iter()
        .map(|s| (s.s0 * (1.0 - s.s0) + s.s1 * (1.0 - s.s1)) / (2.0 * vf))
        .sum::<f64>()
        / pop.true_scores.len() as f64;
    ReplicateRecord {
        replicate: r,
        conditional_entropy: conditional_entropy(&pop.dists).expect("nonempty"),
        uplift_span: uplift_bounds_span(&pop.noisy_scores),
        point_error: report.estimate(beta) - pop.truth.get(beta),
        model_variance,
    }
}

/// Sweeps `axis` over `grid`, averaging `replicates` independent populations
/// per grid value.
pub fn sensitivity_sweep(
    axis: SweepAxis,
    grid: &[f64],
    base: &SweepBase,
    replicates: usize,
) -> Result<SweepSeries> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    let decreasing = grid.windows(2).all(|w| w[0] > w[1]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidParameter(
            "sweep grid must be strictly monotone".into(),
        ));
    }
    if replicates == 0 {
        return Err(Error::InvalidParameter(
            "replicates must be at least 1".into(),
        ));
    }
    let params = grid
        .iter()
        .map(|&x| params_at(axis, x, base))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..replicates).map(move |r| (g, r)))
        .collect();
    let records: Vec<ReplicateRecord> = jobs
        .par_iter()
        .map(|&(g, r)| replicate(&params[g], base.seed, g, r))
        .collect();
    let points = records
        .chunks(replicates)
        .zip(grid.iter().zip(&params))
        .map(|(chunk, (&value, p))| {
            let col = |f: fn(&ReplicateRecord) -> f64| chunk.iter().map(f).collect::<Vec<_>>();
            let entropy = col(|r| r.conditional_entropy);
            let span = col(|r| r.uplift_span);
            let abs_err = col(|r| r.point_error.abs());
            let [a, b, c, d] = p.dirichlet;
            SweepPoint {
                value,
                expected_phi: theoretical_bias(a, b, c, d).expect("positive weights"),
                mean_entropy: mean(&entropy),
                sd_entropy: std_dev(&entropy),
                mean_span: mean(&span),
                sd_span: std_dev(&span),
                mean_abs_error: mean(&abs_err),
                sd_abs_error: std_dev(&abs_err),
                mean_error: mean(&col(|r| r.point_error)),
                mean_model_variance: mean(&col(|r| r.model_variance)),
                replicates: chunk.to_vec(),
            }
        })
        .collect();
    Ok(SweepSeries {
        axis,
        base: *base,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SweepBase {
        SweepBase {
            simplex: SweepBase::churn_point(),
            concentration: 1.0,
            n: 200,
            v: 20,
            seed: 4,
        }
    }

    #[test]
    fn grid_validation() {
        assert!(sensitivity_sweep(SweepAxis::Concentration, &[], &base(), 3).is_err());
        assert!(sensitivity_sweep(SweepAxis::Concentration, &[1.0, 1.0], &base(), 3).is_err());
        assert!(sensitivity_sweep(SweepAxis::Concentration, &[1.0, 3.0, 2.0], &base(), 3).is_err());
        assert!(sensitivity_sweep(SweepAxis::SampleSize, &[10.5], &base(), 3).is_err());
        assert!(sensitivity_sweep(SweepAxis::Trials, &[0.0], &base(), 3).is_err());
    }

    #[test]
    fn singleton_grid() {
        let s = sensitivity_sweep(SweepAxis::Trials, &[10.0], &base(), 4).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].replicates.len(), 4);
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("A".parse::<SweepAxis>().unwrap(), SweepAxis::Concentration);
        assert_eq!("N".parse::<SweepAxis>().unwrap(), SweepAxis::SampleSize);
        assert_eq!("v".parse::<SweepAxis>().unwrap(), SweepAxis::Trials);
        assert!("x".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn entropy_rises_with_concentration() {
        let s = sensitivity_sweep(
            SweepAxis::Concentration,
            &[0.01, 0.1, 1.0, 10.0, 100.0],
            &base(),
            5,
        )
        .unwrap();
        let h = s.column(|p| p.mean_entropy);
        assert!(h.windows(2).all(|w| w[0] < w[1]), "{h:?}");
    }

    #[test]
    fn decreasing_grid_is_accepted() {
        let s = sensitivity_sweep(SweepAxis::SampleSize, &[300.0, 100.0], &base(), 2).unwrap();
        assert_eq!(s.points[0].value, 300.0);
    }
}
