//! Polygon metric: cycle distance between vertices, edge-walk distance from
//! a point on an edge to a vertex, and the piecewise-linear profile of the
//! nearest-free-facility cost along an edge.
//!
//! Conventions, fixed globally: vertices are 0..n; edge k runs from vertex
//! k to vertex (k + 1) mod n; a position t ∈ [0,1] on edge (i, j) is at
//! distance t from i and 1 − t from j. Every edge has unit length.

use crate::dihedral::StateMask;
use crate::error::Error;

/// Tie tolerance for minimizer-set membership. Candidate costs are sums of
/// a position and an integer hop count, so distinct candidates at the
/// sampled rationals used throughout differ by far more than this.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Number of vertices (equivalently edges) of the regular polygon.
///
/// Bounded above by 128 so occupancy states fit in a u128 mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PolygonSize(usize);

impl PolygonSize {
    pub const MAX: usize = 128;

    pub fn new(n: usize) -> Result<Self, Error> {
        if (3..=Self::MAX).contains(&n) {
            Ok(PolygonSize(n))
        } else {
            Err(Error::InvalidPolygonSize(n))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn vertices(self) -> std::ops::Range<usize> {
        0..self.0
    }

    pub fn edges(self) -> impl Iterator<Item = EdgeId> {
        (0..self.0).map(EdgeId)
    }
}

/// Edge k of the polygon, oriented from vertex k to vertex (k + 1) mod n.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct EdgeId(usize);

impl EdgeId {
    pub fn new(index: usize, n: PolygonSize) -> Self {
        assert!(index < n.get(), "edge index {index} out of range");
        EdgeId(index)
    }

    pub fn index(self) -> usize {
        self.0
    }

    /// The (start, end) vertices; t = 0 sits at start, t = 1 at end.
    pub fn endpoints(self, n: PolygonSize) -> (usize, usize) {
        (self.0, (self.0 + 1) % n.get())
    }
}

/// A customer arrival: an edge and a position along it.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Arrival {
    pub edge: EdgeId,
    pub t: f64,
}

/// Hop count between two vertices along the shorter direction of the cycle.
pub fn cycle_distance(u: usize, v: usize, n: PolygonSize) -> usize {
    assert!(u < n.get() && v < n.get(), "vertex out of range for n={}", n.get());
    let d = u.abs_diff(v);
    d.min(n.get() - d)
}

/// Shortest edge-walk distance from position t on an edge to vertex v:
/// the cheaper of reaching the start endpoint (cost t) or the end endpoint
/// (cost 1 − t) and then walking along the cycle.
pub fn edge_walk_distance(n: PolygonSize, e: EdgeId, t: f64, v: usize) -> f64 {
    assert!((0.0..=1.0).contains(&t), "position t={t} outside [0,1]");
    let (i, j) = e.endpoints(n);
    let via_start = t + cycle_distance(i, v, n) as f64;
    let via_end = (1.0 - t) + cycle_distance(j, v, n) as f64;
    via_start.min(via_end)
}

/// Minimum edge-walk cost over free facilities, with every free vertex
/// within `tol` of the minimum reported as a minimizer (ascending order).
///
/// Panics if all facilities are occupied: the process has terminated and
/// there is nothing to assign.
pub fn nearest_free(state: StateMask, arrival: Arrival, tol: f64) -> (f64, Vec<usize>) {
    assert!(!state.is_full(), "no free facility: state is full");
    debug_assert!(tol >= 0.0);
    let n = state.n();
    let mut min_cost = f64::INFINITY;
    for v in state.free_vertices() {
        let d = edge_walk_distance(n, arrival.edge, arrival.t, v);
        if d < min_cost {
            min_cost = d;
        }
    }
    let minimizers: Vec<usize> = state
        .free_vertices()
        .filter(|&v| edge_walk_distance(n, arrival.edge, arrival.t, v) <= min_cost + tol)
        .collect();
    (min_cost, minimizers)
}

/// An interval of arrival positions on one edge over which the minimizer
/// set is constant and the minimum cost is the affine function
/// `slope·t + intercept`.
#[derive(Clone, PartialEq, Debug)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    /// Free vertices attaining the minimum on the open interior, ascending.
    pub minimizers: Vec<usize>,
    /// Always ±1: every candidate distance moves at unit speed in t.
    pub slope: f64,
    pub intercept: f64,
}

impl Segment {
    pub fn cost_at(&self, t: f64) -> f64 {
        self.slope * t + self.intercept
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }
}

/// Partition of [0,1] on edge `e` into segments with constant minimizer set
/// and affine minimum cost.
///
/// Candidate distances are ±t plus an integer, so any two of them cross
/// only at half-integer t; the partition therefore needs breakpoints only
/// in {0, 1/2, 1} and at most two segments, merged into one when both
/// halves carry the same function and minimizer set. Isolated ties at the
/// shared boundary are ignored (they have measure zero).
pub fn cost_profile(state: StateMask, e: EdgeId, tol: f64) -> Vec<Segment> {
    assert!(!state.is_full(), "no free facility: state is full");
    let mut segments: Vec<Segment> = Vec::with_capacity(2);
    for (lo, hi) in [(0.0, 0.5), (0.5, 1.0)] {
        let seg = fit_half(state, e, lo, hi, tol);
        match segments.last_mut() {
            Some(last)
                if last.minimizers == seg.minimizers
                    && last.slope == seg.slope
                    && last.intercept == seg.intercept =>
            {
                last.hi = seg.hi;
            }
            _ => segments.push(seg),
        }
    }
    segments
}

/// Determines the affine minimum and its minimizer set on one half-interval
/// by evaluating at interior quarter points, then locks slope and intercept
/// to their exact integer / half-integer grid.
fn fit_half(state: StateMask, e: EdgeId, lo: f64, hi: f64, tol: f64) -> Segment {
    let t_q1 = lo + 0.25 * (hi - lo);
    let t_mid = lo + 0.5 * (hi - lo);
    let t_q3 = lo + 0.75 * (hi - lo);

    let (c_q1, _) = nearest_free(state, Arrival { edge: e, t: t_q1 }, tol);
    let (c_mid, minimizers) = nearest_free(state, Arrival { edge: e, t: t_mid }, tol);
    let (c_q3, _) = nearest_free(state, Arrival { edge: e, t: t_q3 }, tol);

    let slope_raw = (c_q3 - c_q1) / (t_q3 - t_q1);
    let slope = slope_raw.round();
    debug_assert!(
        (slope_raw - slope).abs() < 1e-9 && slope.abs() == 1.0,
        "minimum cost is not unit-slope affine on [{lo},{hi}]"
    );
    let intercept = ((c_mid - slope * t_mid) * 2.0).round() / 2.0;
    debug_assert!(
        (slope * t_mid + intercept - c_mid).abs() < 1e-9,
        "affine fit does not reproduce the midpoint cost"
    );

    Segment {
        lo,
        hi,
        minimizers,
        slope,
        intercept,
    }
}
