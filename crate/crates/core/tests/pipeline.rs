use cfbounds::estimation::pipeline::model_covariance_term;
use cfbounds::ingest::{synthetic_campaign, ScoreModelSpec, SyntheticSpec};
use cfbounds::{
    run_algorithm_one, run_algorithm_one_detailed, CounterfactualQuantity, Error, SplitSpec,
};

fn small_campaign(seed: u64) -> cfbounds::ingest::SyntheticCampaign {
    let mut spec = SyntheticSpec::churn_campaign(seed);
    spec.n = 4000;
    spec.simplex = [0.6, 0.15, 0.1, 0.15];
    synthetic_campaign(&spec).unwrap()
}

#[test]
fn informative_features_bound_the_generating_values() {
    let c = small_campaign(1);
    for split in [
        SplitSpec::KFold { k: 5, seed: 1 },
        SplitSpec::Holdout {
            test_fraction: 0.3,
            seed: 1,
        },
    ] {
        let r = run_algorithm_one(&c.dataset, &ScoreModelSpec::default(), split).unwrap();
        for q in CounterfactualQuantity::ALL {
            let i = r.uplift(q);
            let t = c.truth.get(q);
            assert!(i.contains(t), "{split:?} {q:?}: {t} outside {i:?}");
        }
    }
}

#[test]
fn constant_treatment_is_rejected_naming_the_cell() {
    let c = small_campaign(2);
    let treated: Vec<usize> = (0..c.dataset.len())
        .filter(|&i| c.dataset.treatment(i))
        .collect();
    let ds = c.dataset.select(&treated);
    let err = run_algorithm_one(&ds, &ScoreModelSpec::default(), SplitSpec::default()).unwrap_err();
    assert!(err.is_validation());
    assert!(err.to_string().contains("treatment=0"), "{err}");
}

#[test]
fn churn_scale_estimate_sits_near_the_upper_bound() {
    let c = synthetic_campaign(&SyntheticSpec::churn_campaign(3)).unwrap();
    assert_eq!(c.dataset.len(), 11268);
    let run =
        run_algorithm_one_detailed(&c.dataset, &ScoreModelSpec::default(), SplitSpec::default())
            .unwrap();
    let r = &run.report;
    let beta = r.estimate(CounterfactualQuantity::Beta);
    let ub = r.uplift(CounterfactualQuantity::Beta).upper;
    assert!(beta <= r.mean_scores.s0);
    assert!(beta <= ub);
    assert!(
        (ub - beta) / ub < 0.1,
        "beta {beta} far from upper bound {ub}"
    );
    assert_eq!(run.scored.rows.len(), c.dataset.len());
}

#[test]
fn marginals_are_consistent() {
    let c = small_campaign(4);
    let r =
        run_algorithm_one(&c.dataset, &ScoreModelSpec::default(), SplitSpec::default()).unwrap();
    let p = r.point.dist;
    assert!((p.beta + p.delta - r.mean_scores.s0).abs() < 1e-12);
    assert!((p.gamma + p.delta - r.mean_scores.s1).abs() < 1e-12);
}

#[test]
fn runs_are_reproducible() {
    let c = small_campaign(5);
    let spec = ScoreModelSpec {
        seed: 8,
        ..Default::default()
    };
    let a =
        run_algorithm_one_detailed(&c.dataset, &spec, SplitSpec::KFold { k: 4, seed: 3 }).unwrap();
    let b =
        run_algorithm_one_detailed(&c.dataset, &spec, SplitSpec::KFold { k: 4, seed: 3 }).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bad_splits_are_rejected() {
    let c = small_campaign(6);
    let spec = ScoreModelSpec::default();
    for split in [
        SplitSpec::KFold { k: 1, seed: 0 },
        SplitSpec::Holdout {
            test_fraction: 0.0,
            seed: 0,
        },
        SplitSpec::Holdout {
            test_fraction: 1.0,
            seed: 0,
        },
    ] {
        assert!(
            run_algorithm_one(&c.dataset, &spec, split).is_err(),
            "{split:?}"
        );
    }
}

#[test]
fn covariance_term_is_small_and_needs_two_replicates() {
    let c = small_campaign(7);
    let spec = ScoreModelSpec::default();
    let split = SplitSpec::Holdout {
        test_fraction: 0.3,
        seed: 0,
    };
    let cov = model_covariance_term(&c.dataset, &spec, split, 5, 0).unwrap();
    assert!(cov.is_finite() && cov.abs() < 0.01, "{cov}");
    assert!(matches!(
        model_covariance_term(&c.dataset, &spec, split, 1, 0),
        Err(Error::InvalidParameter(_))
    ));
}
