//! Expected total cost of greedy online facility assignment on a regular
//! n-gon: unit-capacity facilities sit at the vertices, customers arrive at
//! uniformly random positions on uniformly random edges, and each is
//! irrevocably assigned to the nearest free facility under the edge-walk
//! metric, ties broken uniformly at random.
//!
//! Two computation regimes cover all polygon sizes:
//!
//! - exact backward induction over occupancy states, reduced to one value
//!   per dihedral orbit and integrated exactly on the piecewise-affine cost
//!   segments of each edge ([`exact_dp`]);
//! - seeded Monte Carlo simulation of the full online process with 95%
//!   confidence intervals ([`montecarlo`]).
//!
//! [`validation`] bundles the cross-checks tying the two regimes, the
//! brute-force oracles, and the published reference figures together.

pub mod dihedral;
pub mod error;
pub mod exact_dp;
pub mod geometry;
pub mod montecarlo;
pub mod validation;

pub use dihedral::{apply_symmetry, canonicalize, enumerate_canonical_states, StateMask, Symmetry};
pub use error::Error;
pub use exact_dp::{
    edge_integral, load_table, per_arrival_expectations, per_arrival_expectations_with_limit,
    save_table, transition_kernel, value_function, value_function_full, value_function_with_limit,
    FullStateTable, SuccessorArc, TransitionRow, ValueTable, DEFAULT_EXACT_LIMIT,
    FULL_TABLE_LIMIT, MAX_EXACT_N,
};
pub use geometry::{
    cost_profile, cycle_distance, edge_walk_distance, nearest_free, Arrival, EdgeId, PolygonSize,
    Segment, TIE_TOLERANCE,
};
pub use montecarlo::{
    estimate_per_arrival, estimate_total, mc_state_dp, simulate_run, Estimate, RunTrace, SeedSpec,
    RNG_ID,
};
