use cfbounds::estimation::theoretical_bias;
use cfbounds::model::{
    frechet_bounds_all, pointwise_bounds, uplift_bounds_all, uplift_bounds_span,
};
use cfbounds::{
    point_estimates, CounterfactualDistribution, CounterfactualQuantity, EstimationReport, ScoreSet,
};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn score() -> impl Strategy<Value = f64> {
    prop_oneof![
        1 => Just(0.0),
        1 => Just(1.0),
        1 => 0.0..1e-4f64,
        6 => 0.0..=1.0f64,
    ]
}

fn score_set() -> impl Strategy<Value = ScoreSet<f64>> {
    prop::collection::vec((score(), score()), 1..80).prop_map(|v| ScoreSet::from_tuples(v).unwrap())
}

proptest! {
    #[test]
    fn uplift_inside_frechet(scores in score_set()) {
        let m = scores.mean_scores();
        let f = frechet_bounds_all(m.s0, m.s1).unwrap();
        for (u, f) in uplift_bounds_all(&scores).iter().zip(&f) {
            prop_assert!(f.encloses(u, TOL), "{u:?} not inside {f:?}");
        }
    }

    #[test]
    fn spans_equal_across_quantities(scores in score_set()) {
        let u = uplift_bounds_all(&scores);
        let w = uplift_bounds_span(&scores);
        let m = scores.mean_scores();
        let f = frechet_bounds_all(m.s0, m.s1).unwrap();
        for q in CounterfactualQuantity::ALL {
            prop_assert!((u[q.index()].width() - w).abs() <= TOL);
            prop_assert!((f[q.index()].width() - f[0].width()).abs() <= TOL);
        }
    }

    #[test]
    fn point_estimate_inside_uplift_and_on_simplex(scores in score_set()) {
        let p = point_estimates(&scores).dist;
        let u = uplift_bounds_all(&scores);
        for q in CounterfactualQuantity::ALL {
            let x = p.get(q);
            prop_assert!(x >= u[q.index()].lower - TOL && x <= u[q.index()].upper + TOL);
        }
        prop_assert!((p.to_array().iter().sum::<f64>() - 1.0).abs() <= TOL);
    }

    #[test]
    fn pointwise_bounds_hold_any_joint(s0 in 0.0..=1.0f64, s1 in 0.0..=1.0f64, t in 0.0..=1.0f64) {
        // Every joint with these marginals has delta in [max(0, s0+s1-1), min(s0, s1)].
        let lo = (s0 + s1 - 1.0).max(0.0);
        let hi = s0.min(s1);
        let delta = lo + t * (hi - lo);
        let p = [1.0 - s0 - s1 + delta, s0 - delta, s1 - delta, delta];
        for q in CounterfactualQuantity::ALL {
            let (l, u) = pointwise_bounds(s0, s1, q);
            prop_assert!(p[q.index()] >= l - TOL && p[q.index()] <= u + TOL);
        }
    }

    #[test]
    fn order_invariant(mut pairs in prop::collection::vec((score(), score()), 1..40), seed in any::<u64>()) {
        let a = EstimationReport::from_scores(&ScoreSet::from_tuples(pairs.clone()).unwrap()).unwrap();
        let k = (seed as usize) % pairs.len();
        pairs.rotate_left(k);
        let b = EstimationReport::from_scores(&ScoreSet::from_tuples(pairs).unwrap()).unwrap();
        for q in CounterfactualQuantity::ALL {
            prop_assert!((a.estimate(q) - b.estimate(q)).abs() <= TOL);
            prop_assert!((a.uplift(q).lower - b.uplift(q).lower).abs() <= TOL);
            prop_assert!((a.uplift(q).upper - b.uplift(q).upper).abs() <= TOL);
        }
    }

    #[test]
    fn report_json_round_trip(scores in score_set()) {
        let r = EstimationReport::from_scores(&scores).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: EstimationReport<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(r, back);
    }

    #[test]
    fn bias_antisymmetric(w in prop::array::uniform4(0.01..10.0f64)) {
        let ab = theoretical_bias(w[0], w[1], w[2], w[3]).unwrap();
        let swapped = theoretical_bias(w[1], w[0], w[3], w[2]).unwrap();
        prop_assert!((ab + swapped).abs() <= TOL);
        let a: f64 = w.iter().sum();
        prop_assert!(ab.abs() <= a / (4.0 * (a + 1.0)) + TOL);
    }

    #[test]
    fn normalized_distribution_sums_to_one(w in prop::array::uniform4(1e-6..1.0f64)) {
        let d = CounterfactualDistribution::normalized(w).unwrap();
        prop_assert!((d.to_array().iter().sum::<f64>() - 1.0).abs() <= TOL);
        let s = d.scores();
        prop_assert!((s.s0 - (d.beta + d.delta)).abs() <= TOL);
        prop_assert!((s.s1 - (d.gamma + d.delta)).abs() <= TOL);
    }
}

#[test]
fn f32_agrees_with_f64() {
    let pairs = [(0.1, 0.4), (0.9, 0.2), (0.35, 0.35), (0.0, 1.0)];
    let r64 = EstimationReport::<f64>::from_scores(&ScoreSet::from_tuples(pairs).unwrap()).unwrap();
    let r32 = EstimationReport::<f32>::from_scores(
        &ScoreSet::from_tuples(pairs.map(|(a, b)| (a as f32, b as f32))).unwrap(),
    )
    .unwrap();
    for q in CounterfactualQuantity::ALL {
        assert!((r64.estimate(q) - f64::from(r32.estimate(q))).abs() < 1e-6);
        assert!((r64.uplift(q).upper - f64::from(r32.uplift(q).upper)).abs() < 1e-6);
    }
}
