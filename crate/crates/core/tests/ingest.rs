use cfbounds::ingest::cv::fold_assignment;
use cfbounds::ingest::learner::{train_two_model_on, SCORE_EPS};
use cfbounds::ingest::{
    cross_validate, read_campaign_csv, synthetic_campaign, train_two_model, CampaignDataset,
    CampaignSchema, ScoreModelSpec, SyntheticSpec,
};
use cfbounds::simulation::sampler::stream_rng;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Rows with two Gaussian features and known arm-specific logistic scores.
/// Returns the dataset and the true `(s0, s1)` of every row.
fn logistic_data(n: usize, seed: u64, intercept: f64) -> (CampaignDataset, Vec<(f64, f64)>) {
    let mut rng = stream_rng(seed, 7);
    let mut features = Vec::with_capacity(2 * n);
    let mut t = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for _ in 0..n {
        let x1: f64 = StandardNormal.sample(&mut rng);
        let x2: f64 = StandardNormal.sample(&mut rng);
        let s0 = sigmoid(intercept + 1.2 * x1 - 0.5 * x2);
        let s1 = sigmoid(intercept - 0.3 + 0.4 * x1 + 0.9 * x2);
        let treated = rng.random::<f64>() < 0.5;
        let p = if treated { s1 } else { s0 };
        features.extend([x1, x2]);
        t.push(treated);
        y.push(rng.random::<f64>() < p);
        truth.push((s0, s1));
    }
    let ids = (0..n).map(|i| format!("c{i}")).collect();
    let ds = CampaignDataset::new(ids, features, vec!["x1".into(), "x2".into()], t, y).unwrap();
    (ds, truth)
}

fn unbalanced() -> ScoreModelSpec {
    ScoreModelSpec {
        balancing: None,
        ..Default::default()
    }
}

#[test]
fn separable_toy_scores_near_truth() {
    let n = 400;
    let ids = (0..n).map(|i| i.to_string()).collect();
    let x: Vec<f64> = (0..n).map(|i| (i as f64 - 199.5) / 50.0).collect();
    let t = (0..n).map(|i| i % 2 == 1).collect();
    let y = x.iter().map(|v| *v > 0.0).collect();
    let ds = CampaignDataset::new(ids, x.clone(), vec!["x".into()], t, y).unwrap();
    let model = train_two_model(&ds, &unbalanced()).unwrap();
    let held_out = CampaignDataset::new(
        vec!["a".into(), "b".into()],
        vec![-2.0, 2.0],
        vec!["x".into()],
        vec![false, true],
        vec![false, true],
    )
    .unwrap();
    let lo = model.predict(&held_out, 0).unwrap();
    let hi = model.predict(&held_out, 1).unwrap();
    assert!(lo.s0 < 0.1 && lo.s1 < 0.1, "{lo:?}");
    assert!(hi.s0 > 0.9 && hi.s1 > 0.9, "{hi:?}");
}

#[test]
fn logistic_scores_recovered() {
    let (train, _) = logistic_data(10_000, 1, -0.5);
    let (test, truth) = logistic_data(2_000, 2, -0.5);
    let model = train_two_model(&train, &unbalanced()).unwrap();
    let mut err = 0.0;
    for (i, (s0, s1)) in truth.iter().enumerate() {
        let p = model.predict(&test, i).unwrap();
        err += (p.s0 - s0).abs() + (p.s1 - s1).abs();
    }
    let mae = err / (2.0 * truth.len() as f64);
    assert!(mae < 0.05, "mean absolute score error {mae}");
}

#[test]
fn calibration_restores_base_rate() {
    // Intercept -3.6 gives roughly a 4% positive rate.
    let (train, _) = logistic_data(20_000, 3, -3.6);
    let (test, truth) = logistic_data(5_000, 4, -3.6);
    let rate: f64 = truth.iter().map(|(s0, _)| s0).sum::<f64>() / truth.len() as f64;
    assert!((0.03..0.06).contains(&rate), "{rate}");

    let mean_s0 = |spec: &ScoreModelSpec| {
        let m = train_two_model(&train, spec).unwrap();
        (0..test.len())
            .map(|i| m.predict(&test, i).unwrap().s0)
            .sum::<f64>()
            / test.len() as f64
    };
    let calibrated = mean_s0(&ScoreModelSpec::default());
    let raw = mean_s0(&ScoreModelSpec {
        calibration: false,
        ..Default::default()
    });
    assert!(
        (calibrated - rate).abs() / rate < 0.2,
        "calibrated {calibrated} vs {rate}"
    );
    assert!(raw > 3.0 * rate, "uncalibrated {raw} vs {rate}");
}

#[test]
fn calibrated_mean_within_three_standard_errors() {
    // Intercept-only arms: the calibrated score is a pure prior-shift estimate
    // of the base rate.
    let n = 100_000;
    let mut rng = stream_rng(11, 0);
    let rate = 0.04;
    let ids = (0..n).map(|i| i.to_string()).collect();
    let features: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let t = (0..n).map(|i| i % 2 == 0).collect();
    let y: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < rate).collect();
    let ds = CampaignDataset::new(ids, features, vec!["u".into()], t, y).unwrap();
    let m = train_two_model(&ds, &ScoreModelSpec::default()).unwrap();
    let mean: f64 = (0..n).map(|i| m.predict(&ds, i).unwrap().s0).sum::<f64>() / n as f64;
    let se = (rate * (1.0 - rate) / (n as f64 / 2.0)).sqrt();
    assert!((mean - rate).abs() < 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn deterministic_clamped_and_permutation_equivariant() {
    let (ds, _) = logistic_data(1_500, 5, -2.0);
    let spec = ScoreModelSpec {
        seed: 42,
        ..Default::default()
    };
    let a = cross_validate(&ds, &spec, 5, 9).unwrap();
    let b = cross_validate(&ds, &spec, 5, 9).unwrap();
    assert_eq!(a, b);
    for r in &a.rows {
        assert!(r.s0 >= SCORE_EPS && r.s0 <= 1.0 - SCORE_EPS);
        assert!(r.s1 >= SCORE_EPS && r.s1 <= 1.0 - SCORE_EPS);
    }

    let perm: Vec<usize> = (0..ds.len()).rev().collect();
    let shuffled = ds.select(&perm);
    let c = cross_validate(&shuffled, &spec, 5, 9).unwrap();
    for (k, &i) in perm.iter().enumerate() {
        assert_eq!(c.rows[k].id, a.rows[i].id);
        assert_eq!(c.rows[k].s0.to_bits(), a.rows[i].s0.to_bits());
        assert_eq!(c.rows[k].s1.to_bits(), a.rows[i].s1.to_bits());
    }
}

#[test]
fn out_of_fold_rows_are_not_in_training() {
    let (ds, _) = logistic_data(300, 6, 0.0);
    let folds = fold_assignment(&ds, 3, 1);
    let out = cross_validate(&ds, &unbalanced(), 3, 1).unwrap();
    for (i, r) in out.rows.iter().enumerate() {
        assert_eq!(r.fold, folds[i]);
        // Retraining on the same rows reproduces the score exactly.
        if i < 5 {
            let train: Vec<usize> = (0..ds.len()).filter(|&j| folds[j] != folds[i]).collect();
            let mut spec = unbalanced();
            spec.seed = spec
                .seed
                .wrapping_add((folds[i] as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let m = train_two_model_on(&ds, &train, &spec).unwrap();
            assert_eq!(m.predict(&ds, i).unwrap().s0, r.s0);
        }
    }
}

#[test]
fn beta_hat_stable_across_seeds() {
    let campaign = synthetic_campaign(&SyntheticSpec::churn_campaign(17)).unwrap();
    let betas: Vec<f64> = (0..10)
        .map(|seed| {
            let spec = ScoreModelSpec {
                seed,
                ..Default::default()
            };
            let out = cross_validate(&campaign.dataset, &spec, 5, seed).unwrap();
            let set = out.score_set().unwrap();
            cfbounds::point_estimates(&set).dist.beta
        })
        .collect();
    let max = betas.iter().cloned().fold(f64::MIN, f64::max);
    let min = betas.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max - min < 0.01, "beta_hat range {min}..{max}");
    let mean = betas.iter().sum::<f64>() / 10.0;
    for b in &betas {
        assert!((b - mean).abs() < 0.005, "{b} vs mean {mean}");
    }
}

#[test]
fn csv_toy_and_wide_shape() {
    let mut schema = CampaignSchema::new("t", "y");
    schema.id_col = Some("id".into());
    let toy = "id,t,y,x\n1,0,0,0.5\n2,1,0,1.5\n3,0,1,\n4,1,1,2.0\n";
    let ds = read_campaign_csv(toy.as_bytes(), &schema).unwrap();
    assert_eq!(ds.width(), 1);
    assert_eq!(ds.len(), 4);

    let bad = "t,y,x\n1,0,0.5\n2,1,0.1\n";
    let err = read_campaign_csv(bad.as_bytes(), &CampaignSchema::new("t", "y"))
        .unwrap_err()
        .to_string();
    assert!(err.contains("'t'"), "{err}");

    let campaign = synthetic_campaign(&SyntheticSpec::churn_campaign(3)).unwrap();
    let mut buf = Vec::new();
    cfbounds::ingest::write_campaign_csv(&mut buf, &campaign.dataset).unwrap();
    let back = read_campaign_csv(buf.as_slice(), &schema).unwrap();
    assert_eq!(back.len(), 11268);
    assert!((back.control_fraction() - 0.33).abs() < 1e-4);
    assert_eq!(back.row(10), campaign.dataset.row(10));
}
