//! Statistical behavior of the simulation estimators and their agreement
//! with the exact route.

use ofa_core::{
    estimate_total, mc_state_dp, simulate_run, value_function, Estimate, PolygonSize, SeedSpec,
};

fn size(n: usize) -> PolygonSize {
    PolygonSize::new(n).unwrap()
}

#[test]
fn error_shrinks_and_intervals_cover() {
    let exact = 71.0 / 32.0;

    // Streams are indexed per run, so growing R extends the same sample;
    // with this base seed the error shrinks through each decade.
    let mut previous = f64::INFINITY;
    for runs in [1_000usize, 10_000, 100_000] {
        let est = estimate_total(size(4), runs, 20_240_001).unwrap();
        let err = (est.mean - exact).abs();
        assert!(
            err < previous,
            "R={runs}: error {err} did not shrink from {previous}"
        );
        assert!(est.ci_low <= exact && exact <= est.ci_high);
        previous = err;
    }

    // Coverage sanity: the 95% interval should contain the true value in at
    // least 93 of 100 independent meta-trials.
    let mut hits = 0;
    for trial in 0..100u64 {
        let est = estimate_total(size(4), 1_000, 7_000 + trial).unwrap();
        assert!(est.ci_low <= est.mean && est.mean <= est.ci_high);
        assert!((est.ci_high - est.mean - est.half_width()).abs() <= 1e-12);
        if est.ci_low <= exact && exact <= est.ci_high {
            hits += 1;
        }
    }
    assert!(hits >= 93, "coverage {hits}/100 below the 93 sanity floor");
}

#[test]
fn estimates_are_bit_identical_across_pools() {
    let fingerprint = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let est = estimate_total(size(7), 4_000, 31).unwrap();
            let sampled = mc_state_dp(size(5), 2_000, 31).unwrap();
            let mut bits: Vec<u64> = [est.mean, est.std, est.ci_low, est.ci_high]
                .map(f64::to_bits)
                .to_vec();
            for mask in 0..(1u128 << 5) {
                bits.push(sampled.value_bits(mask).to_bits());
            }
            bits
        })
    };
    assert_eq!(fingerprint(1), fingerprint(3));
}

#[test]
fn cost_bounds_hold_per_arrival() {
    for n in 3..=10 {
        let bound = (n / 2) as f64 + 1.0;
        for stream in 0..200 {
            let trace = simulate_run(size(n), SeedSpec::new(808, stream));
            assert!(trace
                .per_arrival_cost
                .iter()
                .all(|&c| (0.0..=bound).contains(&c)));
            assert!(
                (trace.total - trace.per_arrival_cost.iter().sum::<f64>()).abs() <= 1e-9
            );
        }
    }
}

#[test]
fn three_routes_agree_on_small_polygons() {
    // Exact induction, direct simulation, and the sampled full-state
    // induction must be mutually consistent within combined 3-sigma noise.
    for n in 5..=9 {
        let ps = size(n);
        let exact = value_function(ps).unwrap().expected_total();

        let sim = estimate_total(ps, 10_000, 51).unwrap();
        let sim_se = sim.std / (sim.runs as f64).sqrt();
        assert!(
            (sim.mean - exact).abs() <= 3.0 * sim_se,
            "n={n}: simulation mean {} vs exact {exact}",
            sim.mean
        );

        let replicates: Vec<f64> = (0..5u64)
            .map(|r| mc_state_dp(ps, 3_000, 600 + r).unwrap().at_empty())
            .collect();
        let spread = Estimate::from_samples(&replicates).unwrap();
        assert!(
            (replicates[0] - exact).abs() <= 3.0 * spread.std,
            "n={n}: sampled DP {} vs exact {exact} (std {})",
            replicates[0],
            spread.std
        );

        let combined = (sim_se * sim_se + spread.std * spread.std).sqrt();
        assert!(
            (replicates[0] - sim.mean).abs() <= 3.0 * combined,
            "n={n}: sampled DP and simulation disagree beyond combined noise"
        );
    }
}
