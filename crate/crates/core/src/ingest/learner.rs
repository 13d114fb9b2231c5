//! Two-model (T-learner) score estimation with a ridge-penalized logistic
//! regression per arm, optional EasyEnsemble balancing and the prior-shift
//! correction that undoes the undersampling.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::CampaignDataset;
use super::row_key;
use super::scorefile::ScoreFile;
use crate::model::ScorePair;
use crate::{Error, Result};

/// Scores are clamped to `[SCORE_EPS, 1 - SCORE_EPS]`.
pub const SCORE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    /// Logistic regression fitted separately on control and treated rows.
    TwoModel,
    /// Scores supplied by an external model, looked up by row id.
    ExternalScores,
}

/// Order of ensemble averaging and undersampling correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CalibrationOrder {
    CalibrateThenAverage,
    AverageThenCalibrate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreModelSpec {
    pub kind: LearnerKind,
    /// EasyEnsemble replicate count; `None` trains one model on all rows.
    pub balancing: Option<usize>,
    pub calibration: bool,
    pub calibration_order: CalibrationOrder,
    /// Ridge penalty on the standardized coefficients.
    pub l2: f64,
    pub max_iter: usize,
    pub seed: u64,
    #[serde(skip)]
    pub external_scores: Option<Arc<ScoreFile>>,
}

impl Default for ScoreModelSpec {
    fn default() -> Self {
        ScoreModelSpec {
            kind: LearnerKind::TwoModel,
            balancing: Some(10),
            calibration: true,
            calibration_order: CalibrationOrder::CalibrateThenAverage,
            l2: 1e-4,
            max_iter: 100,
            seed: 0,
            external_scores: None,
        }
    }
}

impl ScoreModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.balancing == Some(0) {
            return Err(Error::InvalidParameter(
                "EasyEnsemble replicate count must be at least 1".into(),
            ));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "invalid l2 penalty {}",
                self.l2
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "max_iter must be at least 1".into(),
            ));
        }
        if self.kind == LearnerKind::ExternalScores && self.external_scores.is_none() {
            return Err(Error::InvalidParameter(
                "external-scores learner needs a score file".into(),
            ));
        }
        Ok(())
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Median imputation followed by standardization, fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub medians: Vec<f64>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(ds: &CampaignDataset, rows: &[usize]) -> Self {
        let w = ds.width();
        let mut medians = Vec::with_capacity(w);
        let mut means = Vec::with_capacity(w);
        let mut scales = Vec::with_capacity(w);
        for j in 0..w {
            let mut col: Vec<f64> = rows
                .iter()
                .map(|&i| ds.row(i)[j])
                .filter(|x| !x.is_nan())
                .collect();
            col.sort_by(f64::total_cmp);
            let median = match col.len() {
                0 => 0.0,
                n if n % 2 == 1 => col[n / 2],
                n => 0.5 * (col[n / 2 - 1] + col[n / 2]),
            };
            let vals: Vec<f64> = rows
                .iter()
                .map(|&i| {
                    let x = ds.row(i)[j];
                    if x.is_nan() {
                        median
                    } else {
                        x
                    }
                })
                .collect();
            let n = vals.len().max(1) as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            medians.push(median);
            means.push(mean);
            scales.push(if sd > 1e-12 { sd } else { 1.0 });
        }
        Standardizer {
            medians,
            means,
            scales,
        }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &x)| {
                let x = if x.is_nan() { self.medians[j] } else { x };
                (x - self.means[j]) / self.scales[j]
            })
            .collect()
    }
}

/// Logistic regression `P(y = 1 | x) = sigmoid(intercept + weights . x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
    }
}

fn penalized_loss(x: &[Vec<f64>], y: &[bool], theta: &[f64], l2: f64) -> f64 {
    let n = x.len() as f64;
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &yi)| {
            let z = theta[0] + row.iter().zip(&theta[1..]).map(|(a, b)| a * b).sum::<f64>();
            softplus(z) - if yi { z } else { 0.0 }
        })
        .sum();
    data / n + 0.5 * l2 * theta[1..].iter().map(|w| w * w).sum::<f64>()
}

/// Fits by damped Newton iterations on the mean log loss plus
/// `l2 / 2 * |weights|^2`. Rows are visited in the order given, so the same
/// rows in the same order give bitwise identical coefficients.
pub fn fit_logistic(x: &[Vec<f64>], y: &[bool], l2: f64, max_iter: usize) -> LogisticModel {
    let d = x.first().map_or(0, Vec::len);
    let p = d + 1;
    let n = x.len() as f64;
    let mut theta = vec![0.0; p];
    let pos = y.iter().filter(|v| **v).count() as f64;
    if pos > 0.0 && pos < n {
        theta[0] = (pos / (n - pos)).ln();
    }
    let mut loss = penalized_loss(x, y, &theta, l2);
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let mut grad = DVector::<f64>::zeros(p);
        let mut hess = DMatrix::<f64>::zeros(p, p);
        let mut xi = vec![0.0; p];
        xi[0] = 1.0;
        for (row, &yi) in x.iter().zip(y) {
            xi[1..].copy_from_slice(row);
            let z: f64 = xi.iter().zip(&theta).map(|(a, b)| a * b).sum();
            let mu = sigmoid(z);
            let r = mu - if yi { 1.0 } else { 0.0 };
            let wgt = mu * (1.0 - mu);
            for a in 0..p {
                grad[a] += r * xi[a];
                let wa = wgt * xi[a];
                for b in 0..=a {
                    hess[(a, b)] += wa * xi[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                hess[(b, a)] = hess[(a, b)];
            }
        }
        grad /= n;
        hess /= n;
        for a in 1..p {
            grad[a] += l2 * theta[a];
            hess[(a, a)] += l2;
        }
        hess[(0, 0)] += 1e-12;
        if grad.amax() < 1e-9 {
            converged = true;
            break;
        }
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => {
                let mut h = hess.clone();
                for a in 0..p {
                    h[(a, a)] += 1e-6;
                }
                h.cholesky()
                    .map(|ch| ch.solve(&grad))
                    .unwrap_or_else(|| grad.clone())
            }
        };
        let slope: f64 = grad.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(a, s)| a - t * s)
                .collect();
            let l = penalized_loss(x, y, &cand, l2);
            if l <= loss - 1e-4 * t * slope {
                let improvement = loss - l;
                theta = cand;
                loss = l;
                accepted = true;
                if improvement < 1e-15 * loss.abs().max(1.0) {
                    converged = true;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // No descent left at machine precision.
            converged = grad.amax() < 1e-6;
            break;
        }
        if converged {
            break;
        }
    }
    LogisticModel {
        intercept: theta[0],
        weights: theta[1..].to_vec(),
        iterations,
        converged,
    }
}

/// Prior-shift correction after undersampling one class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Correction {
    None,
    /// A fraction `r` of the negatives was kept: `p = r p_s / (r p_s - p_s + 1)`.
    NegativesKept(f64),
    /// A fraction `r` of the positives was kept: `p = p_s / (p_s + r (1 - p_s))`.
    PositivesKept(f64),
}

impl Correction {
    pub fn apply(self, ps: f64) -> f64 {
        match self {
            Correction::None => ps,
            Correction::NegativesKept(r) => r * ps / (r * ps - ps + 1.0),
            Correction::PositivesKept(r) => ps / (ps + r * (1.0 - ps)),
        }
    }
}

/// Score model for one arm: an average over one or more logistic members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmModel {
    pub standardizer: Standardizer,
    pub members: Vec<LogisticModel>,
    pub correction: Correction,
    pub order: CalibrationOrder,
}

impl ArmModel {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let x = self.standardizer.transform(row);
        let k = self.members.len() as f64;
        let p = match self.order {
            CalibrationOrder::CalibrateThenAverage => {
                self.members
                    .iter()
                    .map(|m| self.correction.apply(m.predict(&x)))
                    .sum::<f64>()
                    / k
            }
            CalibrationOrder::AverageThenCalibrate => self
                .correction
                .apply(self.members.iter().map(|m| m.predict(&x)).sum::<f64>() / k),
        };
        p.clamp(SCORE_EPS, 1.0 - SCORE_EPS)
    }
}

#[derive(Debug, Clone)]
enum ModelKind {
    Fitted {
        control: ArmModel,
        treated: ArmModel,
    },
    External(HashMap<String, (f64, f64)>),
}

/// Trained estimator of `(s0, s1)`.
#[derive(Debug, Clone)]
pub struct ScoreModel {
    kind: ModelKind,
    /// Non-fatal issues found during training, such as non-convergence.
    pub warnings: Vec<String>,
}

impl ScoreModel {
    pub fn arms(&self) -> Option<(&ArmModel, &ArmModel)> {
        match &self.kind {
            ModelKind::Fitted { control, treated } => Some((control, treated)),
            ModelKind::External(_) => None,
        }
    }

    /// Scores row `i` of `ds`.
    pub fn predict(&self, ds: &CampaignDataset, i: usize) -> Result<ScorePair<f64>> {
        match &self.kind {
            ModelKind::Fitted { control, treated } => {
                let row = ds.row(i);
                Ok(ScorePair {
                    s0: control.predict(row),
                    s1: treated.predict(row),
                })
            }
            ModelKind::External(map) => {
                let id = ds.id(i);
                let &(s0, s1) = map.get(id).ok_or_else(|| {
                    Error::data(format!("row id '{id}'"), "no external score for this row")
                })?;
                ScorePair::new(s0, s1)
            }
        }
    }
}

const SALT_EASY_ENSEMBLE: u64 = 0x45_41_53_59;

fn fit_arm(
    ds: &CampaignDataset,
    rows: &[usize],
    spec: &ScoreModelSpec,
    arm: u64,
    warnings: &mut Vec<String>,
) -> ArmModel {
    let standardizer = Standardizer::fit(ds, rows);
    let (pos, neg): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| ds.outcome(i));
    let (minority, majority, negatives_majority) = if pos.len() <= neg.len() {
        (pos, neg, true)
    } else {
        (neg, pos, false)
    };

    let jobs: Vec<Vec<usize>> = match spec.balancing {
        Some(k) if minority.len() < majority.len() => (0..k as u64)
            .map(|rep| {
                let salt = SALT_EASY_ENSEMBLE ^ (arm << 40) ^ rep;
                let mut keyed: Vec<(u64, usize)> = majority
                    .iter()
                    .map(|&i| (row_key(spec.seed, salt, ds.id(i)), i))
                    .collect();
                keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| ds.id(a.1).cmp(ds.id(b.1))));
                let mut sample: Vec<usize> = minority.clone();
                sample.extend(keyed.iter().take(minority.len()).map(|&(_, i)| i));
                sample.sort_by(|&a, &b| ds.id(a).cmp(ds.id(b)));
                sample
            })
            .collect(),
        _ => {
            let mut all = rows.to_vec();
            all.sort_by(|&a, &b| ds.id(a).cmp(ds.id(b)));
            vec![all]
        }
    };
    let balanced = jobs.len() > 1 || (spec.balancing.is_some() && minority.len() < majority.len());
    let correction = if balanced && spec.calibration {
        let r = minority.len() as f64 / majority.len() as f64;
        if negatives_majority {
            Correction::NegativesKept(r)
        } else {
            Correction::PositivesKept(r)
        }
    } else {
        Correction::None
    };

    let members: Vec<LogisticModel> = jobs
        .par_iter()
        .map(|sample| {
            let x: Vec<Vec<f64>> = sample
                .iter()
                .map(|&i| standardizer.transform(ds.row(i)))
                .collect();
            let y: Vec<bool> = sample.iter().map(|&i| ds.outcome(i)).collect();
            fit_logistic(&x, &y, spec.l2, spec.max_iter)
        })
        .collect();
    let arm_name = if arm == 0 { "control" } else { "treated" };
    for (j, m) in members.iter().enumerate() {
        if !m.converged {
            warnings.push(format!(
                "{arm_name} model member {j} did not converge in {} iterations",
                m.iterations
            ));
        }
    }
    ArmModel {
        standardizer,
        members,
        correction,
        order: spec.calibration_order,
    }
}

/// Fits the control and treated score models on `rows` of `ds`.
///
/// Each arm is fitted on its rows sorted by id, and undersampling ranks rows
/// by a keyed hash of their id, so the fit does not depend on row order.
pub fn train_two_model_on(
    ds: &CampaignDataset,
    rows: &[usize],
    spec: &ScoreModelSpec,
) -> Result<ScoreModel> {
    spec.validate()?;
    if spec.kind == LearnerKind::ExternalScores {
        let file = spec.external_scores.as_ref().expect("validated");
        let map = file
            .rows
            .iter()
            .map(|r| (r.id.clone(), (r.s0_hat, r.s1_hat)))
            .collect();
        return Ok(ScoreModel {
            kind: ModelKind::External(map),
            warnings: Vec::new(),
        });
    }
    ds.check_occupancy(rows, "training data")?;
    // Canonical order: every sum below runs over rows sorted by id.
    let mut rows = rows.to_vec();
    rows.sort_by(|&a, &b| ds.id(a).cmp(ds.id(b)));
    let (treated, control): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| ds.treatment(i));
    let mut warnings = Vec::new();
    let control = fit_arm(ds, &control, spec, 0, &mut warnings);
    let treated = fit_arm(ds, &treated, spec, 1, &mut warnings);
    Ok(ScoreModel {
        kind: ModelKind::Fitted { control, treated },
        warnings,
    })
}

/// Fits the score models on every row of `train`.
pub fn train_two_model(train: &CampaignDataset, spec: &ScoreModelSpec) -> Result<ScoreModel> {
    let rows: Vec<usize> = (0..train.len()).collect();
    train_two_model_on(train, &rows, spec)
}
