//! Cross-route invariants of the exact backward induction.

use ofa_core::{
    canonicalize, edge_integral, enumerate_canonical_states, load_table, nearest_free, save_table,
    transition_kernel, value_function, value_function_full, Arrival, EdgeId, PolygonSize,
    SeedSpec, StateMask, Symmetry, TIE_TOLERANCE,
};
use ofa_core::{apply_symmetry, cost_profile};
use rand::Rng;

fn size(n: usize) -> PolygonSize {
    PolygonSize::new(n).unwrap()
}

#[test]
fn recurrence_fixed_point_on_random_states() {
    // Re-evaluating any state from its stored successor values must land on
    // the stored value again.
    for n in 3..=8 {
        let ps = size(n);
        let table = value_function(ps).unwrap();
        let mut rng = SeedSpec::new(2024, n as u64).rng();
        for _ in 0..200 {
            let bits = rng.random_range(0..(1u128 << n) - 1);
            let state = canonicalize(StateMask::from_bits(ps, bits).unwrap());
            let recomputed: f64 = ps
                .edges()
                .map(|e| edge_integral(state, e, |succ| table.value(succ)))
                .sum::<f64>()
                / n as f64;
            assert!(
                (recomputed - table.value(state)).abs() <= 1e-12,
                "n={n} state={:#b}",
                state.bits()
            );
        }
    }
}

#[test]
fn full_table_matches_reduced_and_is_dihedral_invariant() {
    for n in 3..=6 {
        let ps = size(n);
        let full = value_function_full(ps).unwrap();
        let reduced = value_function(ps).unwrap();
        for bits in 0..(1u128 << n) {
            let state = StateMask::from_bits(ps, bits).unwrap();
            assert!(
                (full.value(state) - reduced.value(state)).abs() <= 1e-12,
                "n={n} bits={bits:#b}: full and reduced tables disagree"
            );
            for g in Symmetry::all(ps) {
                let image = apply_symmetry(state, g);
                assert!(
                    (full.value(state) - full.value(image)).abs() <= 1e-12,
                    "n={n} bits={bits:#b}: value not invariant under {g:?}"
                );
            }
        }
    }
}

#[test]
fn transition_rows_conserve_probability() {
    for n in 3..=7 {
        let ps = size(n);
        for popcount in 0..n {
            for state in enumerate_canonical_states(ps, popcount) {
                let row = transition_kernel(state);
                let total: f64 = row.successors.iter().map(|a| a.probability).sum();
                assert!(
                    (total - 1.0).abs() <= 1e-12,
                    "n={n} state={:#b}: probabilities sum to {total}",
                    state.bits()
                );
                assert!(row
                    .successors
                    .iter()
                    .all(|a| (0.0..=1.0).contains(&a.probability)));
            }
        }
    }
}

// 8-point Gauss-Legendre rule on [-1, 1].
const GAUSS_NODES: [f64; 8] = [
    -0.9602898564975363,
    -0.7966664774136267,
    -0.525532409916329,
    -0.1834346424956498,
    0.1834346424956498,
    0.525532409916329,
    0.7966664774136267,
    0.9602898564975363,
];
const GAUSS_WEIGHTS: [f64; 8] = [
    0.1012285362903763,
    0.2223810344533745,
    0.3137066458778873,
    0.362683783378362,
    0.362683783378362,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

/// Quadrature route to the per-edge integral: evaluate the true integrand
/// through nearest_free at each Gauss node instead of trusting the fitted
/// affine segments. Any ≥1-point rule is exact on affine pieces, so a
/// mismatch indicates mis-fitted segments.
fn gauss_edge_integral(
    state: StateMask,
    edge: EdgeId,
    successor_value: impl Fn(StateMask) -> f64,
) -> f64 {
    let mut acc = 0.0;
    for seg in cost_profile(state, edge, TIE_TOLERANCE) {
        let mid = 0.5 * (seg.lo + seg.hi);
        let half = 0.5 * seg.length();
        for (x, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
            let t = mid + half * x;
            let (cost, minimizers) = nearest_free(state, Arrival { edge, t }, TIE_TOLERANCE);
            let share = 1.0 / minimizers.len() as f64;
            let future: f64 = minimizers
                .iter()
                .map(|&v| successor_value(state.with(v)))
                .sum::<f64>()
                * share;
            acc += w * half * (cost + future);
        }
    }
    acc
}

#[test]
fn quadrature_route_agrees_with_exact_integration() {
    for n in 3..=6 {
        let ps = size(n);
        let table = value_function(ps).unwrap();
        for popcount in 0..n {
            for state in enumerate_canonical_states(ps, popcount) {
                for e in ps.edges() {
                    let exact = edge_integral(state, e, |s| table.value(s));
                    let gauss = gauss_edge_integral(state, e, |s| table.value(s));
                    assert!(
                        (exact - gauss).abs() <= 1e-12,
                        "n={n} state={:#b} edge={}: exact {exact} vs gauss {gauss}",
                        state.bits(),
                        e.index()
                    );
                }
            }
        }
    }
}

#[test]
fn table_values_are_nonnegative_with_zero_terminal() {
    for n in 3..=8 {
        let ps = size(n);
        let table = value_function(ps).unwrap();
        assert_eq!(table.value(StateMask::full(ps)), 0.0);
        assert!(table.rows().iter().all(|&(_, v)| v >= 0.0));
    }
}

#[test]
fn table_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("square.values");
    let table = value_function(size(4)).unwrap();
    save_table(&table, &path).unwrap();

    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# n=4"));
    assert_eq!(lines.next(), Some("mask,popcount,value"));
    assert_eq!(text.lines().count(), 2 + 6);

    let loaded = load_table(&path).unwrap();
    assert_eq!(loaded.rows(), table.rows());
}
