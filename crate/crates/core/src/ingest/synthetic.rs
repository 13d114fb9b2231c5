//! Synthetic campaign generator with a known counterfactual truth.
//!
//! Each row draws its own distribution `Dirichlet(A p)`, a treatment flag and
//! a pair of potential outcomes; the observed outcome is the one matching the
//! treatment. The first two features are the logits of the row's scores, so
//! a linear log-odds model can recover them.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dataset::CampaignDataset;
use crate::model::{CounterfactualDistribution, ScorePair, ScoreSet};
use crate::simulation::population::outcome_pair;
use crate::simulation::sampler::{categorical4, stream_rng, Dirichlet4};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    /// Share of rows in the control group; the count is rounded to nearest.
    pub control_fraction: f64,
    /// Population mean `(alpha, beta, gamma, delta)`.
    pub simplex: [f64; 4],
    pub concentration: f64,
    /// Pure noise columns appended after the two informative ones.
    pub noise_features: usize,
    /// Standard deviation of Gaussian noise added to the informative columns.
    pub feature_noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// 11268 rows, a third in control, churn near 4.85% in control and 4.03%
    /// under treatment.
    pub fn churn_campaign(seed: u64) -> Self {
        SyntheticSpec {
            n: 11268,
            control_fraction: 0.33,
            simplex: [0.9212, 0.0385, 0.0303, 0.0100],
            concentration: 20.0,
            noise_features: 3,
            feature_noise: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::InvalidParameter(format!(
                "need at least 4 rows, got {}",
                self.n
            )));
        }
        if !(self.control_fraction > 0.0 && self.control_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "control fraction must lie in (0, 1), got {}",
                self.control_fraction
            )));
        }
        if !(self.concentration.is_finite() && self.concentration > 0.0) {
            return Err(Error::Domain {
                what: "concentration",
                value: self.concentration,
            });
        }
        if self.feature_noise.is_nan() || self.feature_noise < 0.0 {
            return Err(Error::Domain {
                what: "feature noise",
                value: self.feature_noise,
            });
        }
        CounterfactualDistribution::from_array(self.simplex)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCampaign {
    pub dataset: CampaignDataset,
    pub dists: Vec<CounterfactualDistribution<f64>>,
    /// Mean of the row distributions.
    pub truth: CounterfactualDistribution<f64>,
}

impl SyntheticCampaign {
    pub fn true_scores(&self) -> ScoreSet<f64> {
        ScoreSet::new(self.dists.iter().map(|d| d.scores()).collect()).expect("n >= 4")
    }
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-4, 1.0 - 1e-4);
    (p / (1.0 - p)).ln()
}

pub fn synthetic_campaign(spec: &SyntheticSpec) -> Result<SyntheticCampaign> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = stream_rng(spec.seed, 0);
    let n_control = (spec.control_fraction * n as f64).round() as usize;
    let mut treatment: Vec<bool> = (0..n).map(|i| i >= n_control).collect();
    treatment.shuffle(&mut rng);

    let dirichlet = Dirichlet4::new(spec.simplex.map(|p| p * spec.concentration))?;
    let width = 2 + spec.noise_features;
    let mut features = Vec::with_capacity(n * width);
    let mut outcome = Vec::with_capacity(n);
    let mut dists = Vec::with_capacity(n);
    let mut sums = [0.0; 4];
    for &t in &treatment {
        let p = dirichlet.sample(&mut rng);
        let d = CounterfactualDistribution::from_array_unchecked(p);
        let ScorePair { s0, s1 } = d.scores();
        let (y0, y1) = outcome_pair(categorical4(&mut rng, &p));
        outcome.push(if t { y1 } else { y0 });
        for s in [s0, s1] {
            let e: f64 = StandardNormal.sample(&mut rng);
            features.push(logit(s) + spec.feature_noise * e);
        }
        for _ in 0..spec.noise_features {
            features.push(StandardNormal.sample(&mut rng));
        }
        for (acc, x) in sums.iter_mut().zip(p) {
            *acc += x;
        }
        dists.push(d);
    }
    let mut names = vec!["logit_s0".to_string(), "logit_s1".to_string()];
    names.extend((1..=spec.noise_features).map(|j| format!("noise_{j}")));
    let ids = (1..=n).map(|i| i.to_string()).collect();
    let dataset = CampaignDataset::new(ids, features, names, treatment, outcome)?;
    Ok(SyntheticCampaign {
        dataset,
        dists,
        truth: CounterfactualDistribution::from_array_unchecked(sums.map(|x| x / n as f64)),
    })
}
