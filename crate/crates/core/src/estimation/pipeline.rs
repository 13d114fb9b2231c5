//! End-to-end estimation from campaign data: train score models, score rows
//! they were not trained on, and summarize the scores.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EstimationReport;
use crate::ingest::cv::{
    cross_validate, fold_assignment, holdout_split, score_holdout, ScoredRows,
};
use crate::ingest::learner::train_two_model_on;
use crate::ingest::{CampaignDataset, ScoreModelSpec};
use crate::simulation::sampler::stream_rng;
use crate::{Error, Result};

/// How rows are split between training and scoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SplitSpec {
    /// One train/test split; estimates use the test rows only.
    Holdout { test_fraction: f64, seed: u64 },
    /// Every row scored out of fold; estimates use all rows.
    KFold { k: usize, seed: u64 },
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::KFold { k: 5, seed: 0 }
    }
}

/// Report together with the scores it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmRun {
    pub report: EstimationReport<f64>,
    pub scored: ScoredRows,
    pub split: SplitSpec,
}

/// Fails with the first empty `(treatment, outcome)` cell of the whole dataset.
fn check_dataset(ds: &CampaignDataset) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::EmptyCollection);
    }
    let all: Vec<usize> = (0..ds.len()).collect();
    ds.check_occupancy(&all, "dataset")
}

pub fn run_algorithm_one_detailed(
    ds: &CampaignDataset,
    learner: &ScoreModelSpec,
    split: SplitSpec,
) -> Result<AlgorithmRun> {
    check_dataset(ds)?;
    let scored = match split {
        SplitSpec::Holdout {
            test_fraction,
            seed,
        } => {
            let (train, test) = holdout_split(ds, test_fraction, seed)?;
            ds.check_occupancy(&train, "training split")?;
            score_holdout(ds, &train, &test, learner)?
        }
        SplitSpec::KFold { k, seed } => cross_validate(ds, learner, k, seed)?,
    };
    let report = EstimationReport::from_scores(&scored.score_set()?)?;
    Ok(AlgorithmRun {
        report,
        scored,
        split,
    })
}

/// Point estimates and both interval families for all four quantities,
/// computed from held-out scores.
pub fn run_algorithm_one(
    ds: &CampaignDataset,
    learner: &ScoreModelSpec,
    split: SplitSpec,
) -> Result<EstimationReport<f64>> {
    Ok(run_algorithm_one_detailed(ds, learner, split)?.report)
}

/// Bootstrap estimate of the learner covariance term: the covariance of
/// `(s0_hat, s1_hat)` across retrainings on resampled training sets,
/// averaged over the scored rows. With k folds, the first fold is held out.
pub fn model_covariance_term(
    ds: &CampaignDataset,
    learner: &ScoreModelSpec,
    split: SplitSpec,
    replicates: usize,
    seed: u64,
) -> Result<f64> {
    if replicates < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 bootstrap replicates, got {replicates}"
        )));
    }
    check_dataset(ds)?;
    let (train, test) = match split {
        SplitSpec::Holdout {
            test_fraction,
            seed,
        } => holdout_split(ds, test_fraction, seed)?,
        SplitSpec::KFold { k, seed } => {
            if k < 2 || k > ds.len() {
                return Err(Error::InvalidParameter(format!("invalid fold count {k}")));
            }
            let fold = fold_assignment(ds, k, seed);
            (0..ds.len()).partition(|&i| fold[i] != 0)
        }
    };
    let preds = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let sample: Vec<usize> = (0..train.len())
                .map(|_| train[rng.random_range(0..train.len())])
                .collect();
            ds.check_occupancy(&sample, &format!("bootstrap replicate {}", b + 1))?;
            let model = train_two_model_on(ds, &sample, learner)?;
            test.iter()
                .map(|&i| model.predict(ds, i).map(|p| (p.s0, p.s1)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let b = replicates as f64;
    let mut total = 0.0;
    for j in 0..test.len() {
        let m0 = preds.iter().map(|p| p[j].0).sum::<f64>() / b;
        let m1 = preds.iter().map(|p| p[j].1).sum::<f64>() / b;
        total += preds
            .iter()
            .map(|p| (p[j].0 - m0) * (p[j].1 - m1))
            .sum::<f64>()
            / b;
    }
    Ok(total / test.len() as f64)
}
