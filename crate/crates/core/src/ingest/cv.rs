//! Out-of-fold scoring and train/test splits.
//!
//! Fold membership is decided by a keyed hash of the row id, so permuting the
//! rows of a dataset permutes the output scores and changes nothing else.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::CampaignDataset;
use super::learner::{train_two_model_on, ScoreModelSpec};
use super::row_key;
use super::scorefile::{ScoreFile, ScoreRow};
use crate::model::{ScorePair, ScoreSet};
use crate::{Error, Result};

const SALT_FOLDS: u64 = 0x46_4f_4c_44;
const SALT_HOLDOUT: u64 = 0x48_4f_4c_44;

/// A row scored by a model that did not see it during training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRow {
    pub id: String,
    /// Fold whose model produced the score.
    pub fold: usize,
    pub s0: f64,
    pub s1: f64,
    pub treatment: bool,
    pub outcome: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoredRows {
    pub rows: Vec<ScoredRow>,
    /// Training warnings, prefixed by fold.
    pub warnings: Vec<String>,
}

impl ScoredRows {
    pub fn score_set(&self) -> Result<ScoreSet<f64>> {
        ScoreSet::new(
            self.rows
                .iter()
                .map(|r| ScorePair { s0: r.s0, s1: r.s1 })
                .collect(),
        )
    }

    pub fn to_score_file(&self) -> ScoreFile {
        ScoreFile {
            rows: self
                .rows
                .iter()
                .map(|r| ScoreRow {
                    id: r.id.clone(),
                    s0_hat: r.s0,
                    s1_hat: r.s1,
                    t: Some(r.treatment),
                    y: Some(r.outcome),
                })
                .collect(),
        }
    }
}

/// Row indices ranked by their keyed id hash.
fn hash_order(ds: &CampaignDataset, seed: u64, salt: u64) -> Vec<usize> {
    let mut keyed: Vec<(u64, usize)> = (0..ds.len())
        .map(|i| (row_key(seed, salt, ds.id(i)), i))
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| ds.id(a.1).cmp(ds.id(b.1))));
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Fold index of every row, in dataset order.
pub fn fold_assignment(ds: &CampaignDataset, k_folds: usize, seed: u64) -> Vec<usize> {
    let mut fold = vec![0; ds.len()];
    for (rank, i) in hash_order(ds, seed, SALT_FOLDS).into_iter().enumerate() {
        fold[i] = rank % k_folds;
    }
    fold
}

/// `(train, test)` row indices, each in dataset order. The test part holds
/// `round(test_fraction * n)` rows.
pub fn holdout_split(
    ds: &CampaignDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n_test = (test_fraction * ds.len() as f64).round() as usize;
    if n_test == 0 || n_test == ds.len() {
        return Err(Error::InvalidParameter(format!(
            "test fraction {test_fraction} leaves an empty split of {} rows",
            ds.len()
        )));
    }
    let mut is_test = vec![false; ds.len()];
    for i in hash_order(ds, seed, SALT_HOLDOUT).into_iter().take(n_test) {
        is_test[i] = true;
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| is_test[i]);
    Ok((train, test))
}

fn fold_spec(spec: &ScoreModelSpec, fold: usize) -> ScoreModelSpec {
    let mut s = spec.clone();
    s.seed = spec
        .seed
        .wrapping_add((fold as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    s
}

/// Scores every row with the model trained on the other `k_folds - 1` folds.
/// Output rows follow the input order.
pub fn cross_validate(
    ds: &CampaignDataset,
    spec: &ScoreModelSpec,
    k_folds: usize,
    seed: u64,
) -> Result<ScoredRows> {
    if k_folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 folds, got {k_folds}"
        )));
    }
    if k_folds > ds.len() {
        return Err(Error::InvalidParameter(format!(
            "{k_folds} folds requested for {} rows",
            ds.len()
        )));
    }
    let fold = fold_assignment(ds, k_folds, seed);
    let trained = (0..k_folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..ds.len()).filter(|&i| fold[i] != f).collect();
            ds.check_occupancy(&train, &format!("training portion of fold {}", f + 1))?;
            train_two_model_on(ds, &train, &fold_spec(spec, f))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(ds.len());
    for (i, &f) in fold.iter().enumerate() {
        let s = trained[f].predict(ds, i)?;
        rows.push(ScoredRow {
            id: ds.id(i).to_string(),
            fold: f,
            s0: s.s0,
            s1: s.s1,
            treatment: ds.treatment(i),
            outcome: ds.outcome(i),
        });
    }
    let warnings = trained
        .iter()
        .enumerate()
        .flat_map(|(f, m)| {
            m.warnings
                .iter()
                .map(move |w| format!("fold {}: {w}", f + 1))
        })
        .collect();
    Ok(ScoredRows { rows, warnings })
}

/// Trains on `train` and scores `test`.
pub fn score_holdout(
    ds: &CampaignDataset,
    train: &[usize],
    test: &[usize],
    spec: &ScoreModelSpec,
) -> Result<ScoredRows> {
    let model = train_two_model_on(ds, train, spec)?;
    let rows = test
        .iter()
        .map(|&i| {
            let s = model.predict(ds, i)?;
            Ok(ScoredRow {
                id: ds.id(i).to_string(),
                fold: 0,
                s0: s.s0,
                s1: s.s1,
                treatment: ds.treatment(i),
                outcome: ds.outcome(i),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoredRows {
        rows,
        warnings: model.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> CampaignDataset {
        let ids = (0..n).map(|i| format!("r{i}")).collect();
        let features = (0..n).map(|i| (i % 7) as f64).collect();
        let t = (0..n).map(|i| i % 2 == 0).collect();
        let y = (0..n).map(|i| i % 3 == 0).collect();
        CampaignDataset::new(ids, features, vec!["x".into()], t, y).unwrap()
    }

    #[test]
    fn folds_are_balanced() {
        let f = fold_assignment(&toy(100), 5, 3);
        for k in 0..5 {
            assert_eq!(f.iter().filter(|&&x| x == k).count(), 20);
        }
    }

    #[test]
    fn every_row_scored_once() {
        let ds = toy(100);
        let out = cross_validate(&ds, &ScoreModelSpec::default(), 5, 1).unwrap();
        assert_eq!(out.rows.len(), 100);
        for (i, r) in out.rows.iter().enumerate() {
            assert_eq!(r.id, ds.id(i));
        }
    }

    #[test]
    fn single_class_fails_with_fold() {
        let ds = CampaignDataset::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.0, 1.0, 2.0],
            vec!["x".into()],
            vec![true, false, true],
            vec![false, false, false],
        )
        .unwrap();
        let err = cross_validate(&ds, &ScoreModelSpec::default(), 2, 0)
            .unwrap_err()
            .to_string();
        assert!(err.contains("fold"), "{err}");
        assert!(cross_validate(&ds, &ScoreModelSpec::default(), 1, 0).is_err());
    }

    #[test]
    fn holdout_sizes() {
        let ds = toy(50);
        let (train, test) = holdout_split(&ds, 0.3, 9).unwrap();
        assert_eq!(test.len(), 15);
        assert_eq!(train.len(), 35);
        assert!(holdout_split(&ds, 1.0, 9).is_err());
    }
}
