use cfbounds::estimation::phi_individual_mean;
use cfbounds::simulation::{
    run_benchmark, sample_population, sensitivity_sweep, BenchmarkProtocol, SimulationParams,
    SweepAxis,
};
use cfbounds::{phi_population, CounterfactualQuantity, Error};

fn params(n: usize, v: u32, dirichlet: [f64; 4], seed: u64) -> SimulationParams {
    SimulationParams {
        n,
        v,
        dirichlet,
        seed,
    }
}

#[test]
fn populations_are_bitwise_reproducible() {
    let p = params(500, 7, [0.5, 0.2, 0.3, 1.0], 42);
    let a = sample_population(&p).unwrap();
    let b = sample_population(&p).unwrap();
    assert_eq!(a.dists, b.dists);
    assert_eq!(a.noisy_scores, b.noisy_scores);
    assert_eq!(a.outcomes, b.outcomes);
    let c = sample_population(&SimulationParams { seed: 43, ..p }).unwrap();
    assert_ne!(a.dists, c.dists);
}

#[test]
fn single_run_benchmark_is_reproducible() {
    let protocol = BenchmarkProtocol {
        runs: 1,
        seed: 9,
        ..Default::default()
    };
    let a = run_benchmark(&protocol).unwrap();
    let b = run_benchmark(&protocol).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.records.len(), 1);
}

#[test]
fn individual_identities_and_lattice() {
    let v = 13;
    let pop = sample_population(&params(2000, v, [0.3, 0.1, 2.0, 0.6], 1)).unwrap();
    for (d, s) in pop.dists.iter().zip(pop.true_scores.iter()) {
        assert_eq!(s.s0, d.beta + d.delta);
        assert_eq!(s.s1, d.gamma + d.delta);
        assert!((d.to_array().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    for s in pop.noisy_scores.iter() {
        for x in [s.s0, s.s1] {
            let k = x * f64::from(v);
            assert!((k - k.round()).abs() < 1e-9, "{x} is off the 1/{v} lattice");
        }
    }
}

#[test]
fn exact_scores_always_bound_the_truth() {
    for seed in 0..200 {
        let a = 0.1 + (seed as f64) * 0.07;
        let pop = sample_population(&params(
            50 + seed as usize * 5,
            5,
            [a, a * 0.3, a * 0.5, a * 0.2],
            seed,
        ))
        .unwrap();
        let r = pop.exact_report();
        for q in CounterfactualQuantity::ALL {
            let i = r.uplift(q);
            let t = pop.truth.get(q);
            assert!(
                t >= i.lower - 1e-12 && t <= i.upper + 1e-12,
                "seed {seed} {q:?}: {t} outside {i:?}"
            );
        }
    }
}

#[test]
fn many_trials_approach_exact_scores() {
    let pop = sample_population(&params(10_000, 500, [0.947, 0.020, 0.017, 0.017], 3)).unwrap();
    let (noisy, exact) = (pop.noisy_report(), pop.exact_report());
    for q in CounterfactualQuantity::ALL {
        assert!((noisy.estimate(q) - exact.estimate(q)).abs() < 0.01);
        assert!((noisy.uplift(q).lower - exact.uplift(q).lower).abs() < 0.01);
        assert!((noisy.uplift(q).upper - exact.uplift(q).upper).abs() < 0.01);
    }
}

#[test]
fn dependency_term_matches_point_estimate_gap() {
    for seed in 0..20 {
        let pop = sample_population(&params(300, 1, [1.5, 0.4, 0.7, 2.2], seed)).unwrap();
        let gap = pop.exact_report().estimate(CounterfactualQuantity::Beta) - pop.truth.beta;
        assert!((phi_population(&pop.dists).unwrap() - gap).abs() < 1e-9);
        assert!((phi_individual_mean(&pop.dists).unwrap() - gap).abs() < 1e-9);
    }
}

#[test]
fn sweep_rejects_bad_grids() {
    let base = SweepAxis::SampleSize.default_base(0);
    assert!(matches!(
        sensitivity_sweep(SweepAxis::SampleSize, &[], &base, 3),
        Err(Error::InvalidParameter(_))
    ));
    assert!(sensitivity_sweep(SweepAxis::SampleSize, &[10.0, 30.0, 20.0], &base, 3).is_err());
    assert!(sensitivity_sweep(SweepAxis::SampleSize, &[10.5], &base, 3).is_err());
    let one = sensitivity_sweep(SweepAxis::SampleSize, &[50.0], &base, 4).unwrap();
    assert_eq!(one.points.len(), 1);
    assert_eq!(one.points[0].replicates.len(), 4);
}

#[test]
fn sweep_is_reproducible() {
    let axis = SweepAxis::Trials;
    let grid = [1.0, 5.0, 25.0];
    let base = axis.default_base(5);
    assert_eq!(
        sensitivity_sweep(axis, &grid, &base, 3).unwrap(),
        sensitivity_sweep(axis, &grid, &base, 3).unwrap()
    );
}
