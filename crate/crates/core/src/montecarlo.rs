//! Direct simulation of the online assignment process and a sampled
//! full-state backward induction used as an independent cross-check.
//!
//! Every run owns a random stream derived deterministically from a base
//! seed and a stream index, so serial and parallel execution produce
//! bit-identical results and any published number can be reproduced from
//! the logged (n, R, seed) triple.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dihedral::{masks_with_popcount, StateMask};
use crate::error::Error;
use crate::exact_dp::FullStateTable;
use crate::geometry::{
    edge_walk_distance, nearest_free, Arrival, EdgeId, PolygonSize, TIE_TOLERANCE,
};

/// Identity of the pseudorandom generator, logged with every estimate.
pub const RNG_ID: &str = "chacha8";

/// Deterministic handle for one random stream: a base seed shared by a
/// whole experiment plus the index of the stream within it.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SeedSpec {
    pub base_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64, stream_index: u64) -> Self {
        SeedSpec {
            base_seed,
            stream_index,
        }
    }

    /// The stream's generator; streams with different indices are
    /// statistically independent.
    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Record of one simulated episode: n arrivals, their immediate costs, and
/// the vertices they occupied (a permutation of 0..n once complete).
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub n: PolygonSize,
    pub per_arrival_cost: Vec<f64>,
    pub chosen_vertex: Vec<usize>,
    pub total: f64,
}

/// Sample mean with Bessel-corrected standard deviation and the 1.96-sigma
/// normal 95% confidence interval.
#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Result<Self, Error> {
        let runs = samples.len();
        if runs < 2 {
            return Err(Error::TooFewRuns(runs));
        }
        let mean = samples.iter().sum::<f64>() / runs as f64;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (runs as f64 - 1.0);
        let std = var.sqrt();
        let half = 1.96 * std / (runs as f64).sqrt();
        Ok(Estimate {
            mean,
            std,
            runs,
            ci_low: mean - half,
            ci_high: mean + half,
        })
    }

    pub fn half_width(&self) -> f64 {
        1.96 * self.std / (self.runs as f64).sqrt()
    }

    /// The estimate of `factor` times the underlying quantity, e.g. the
    /// per-customer cost as `1/n` times the total.
    pub fn scaled(&self, factor: f64) -> Estimate {
        Estimate {
            mean: self.mean * factor,
            std: self.std * factor,
            runs: self.runs,
            ci_low: self.ci_low * factor,
            ci_high: self.ci_high * factor,
        }
    }

    /// Whether the confidence interval intersects [lo, hi].
    pub fn overlaps(&self, lo: f64, hi: f64) -> bool {
        self.ci_low <= hi && lo <= self.ci_high
    }
}

/// Simulates one full episode: n arrivals, each sampling an edge, then a
/// position, then (always) a tie-break draw among the minimizers, in that
/// fixed order.
pub fn simulate_run(n: PolygonSize, seed: SeedSpec) -> RunTrace {
    let mut rng = seed.rng();
    let mut state = StateMask::empty(n);
    let mut per_arrival_cost = Vec::with_capacity(n.get());
    let mut chosen_vertex = Vec::with_capacity(n.get());
    for _ in 0..n.get() {
        let edge = EdgeId::new(rng.random_range(0..n.get()), n);
        let t: f64 = rng.random();
        let (cost, minimizers) = nearest_free(state, Arrival { edge, t }, TIE_TOLERANCE);
        let winner = minimizers[rng.random_range(0..minimizers.len())];
        state = state.with(winner);
        per_arrival_cost.push(cost);
        chosen_vertex.push(winner);
    }
    let total = per_arrival_cost.iter().sum();
    RunTrace {
        n,
        per_arrival_cost,
        chosen_vertex,
        total,
    }
}

fn collect_traces(n: PolygonSize, runs: usize, base_seed: u64) -> Vec<RunTrace> {
    (0..runs as u64)
        .into_par_iter()
        .map(|index| simulate_run(n, SeedSpec::new(base_seed, index)))
        .collect()
}

/// Estimates the expected total cost from `runs` independent episodes with
/// stream indices 0..runs.
pub fn estimate_total(n: PolygonSize, runs: usize, base_seed: u64) -> Result<Estimate, Error> {
    if runs < 2 {
        return Err(Error::TooFewRuns(runs));
    }
    let totals: Vec<f64> = (0..runs as u64)
        .into_par_iter()
        .map(|index| simulate_run(n, SeedSpec::new(base_seed, index)).total)
        .collect();
    Estimate::from_samples(&totals)
}

/// Columnwise estimates of the cost of each arrival k = 1..n, over the same
/// runs that [`estimate_total`] would use for this (n, runs, base_seed).
pub fn estimate_per_arrival(
    n: PolygonSize,
    runs: usize,
    base_seed: u64,
) -> Result<Vec<Estimate>, Error> {
    if runs < 2 {
        return Err(Error::TooFewRuns(runs));
    }
    let traces = collect_traces(n, runs, base_seed);
    let mut column = vec![0.0; runs];
    (0..n.get())
        .map(|k| {
            for (slot, trace) in column.iter_mut().zip(&traces) {
                *slot = trace.per_arrival_cost[k];
            }
            Estimate::from_samples(&column)
        })
        .collect()
}

/// Sampled backward induction over all 2^n raw states: each state's
/// expectation is averaged over `samples_per_state` random (edge, t) draws
/// using the already-filled deeper levels.
///
/// Deliberately bypasses the canonical-state machinery and the shared
/// nearest-free search: this estimator cross-checks both, so it keeps its
/// own scan with the same 1e-12 near-tie tolerance.
pub fn mc_state_dp(
    n: PolygonSize,
    samples_per_state: usize,
    base_seed: u64,
) -> Result<FullStateTable, Error> {
    if samples_per_state == 0 {
        return Err(Error::NoSamples);
    }
    let mut table = FullStateTable::zeroed(n)?;
    for k in (0..n.get()).rev() {
        let masks: Vec<u128> = masks_with_popcount(n.get(), k).collect();
        let level: Vec<(u128, f64)> = masks
            .into_par_iter()
            .map(|bits| {
                let value = sample_state_value(n, bits, samples_per_state, &table, base_seed);
                (bits, value)
            })
            .collect();
        for (bits, value) in level {
            table.set_bits(bits, value);
        }
    }
    Ok(table)
}

fn sample_state_value(
    n: PolygonSize,
    bits: u128,
    samples: usize,
    table: &FullStateTable,
    base_seed: u64,
) -> f64 {
    const EPS: f64 = 1e-12;
    // One stream per state, keyed by its mask, so the estimate does not
    // depend on scheduling.
    let mut rng = SeedSpec::new(base_seed, bits as u64).rng();
    let free: Vec<usize> = (0..n.get()).filter(|v| bits >> v & 1 == 0).collect();
    let mut acc = 0.0;
    for _ in 0..samples {
        let edge = EdgeId::new(rng.random_range(0..n.get()), n);
        let t: f64 = rng.random();
        let mut best = f64::INFINITY;
        let mut ties: Vec<usize> = Vec::with_capacity(4);
        for &v in &free {
            let d = edge_walk_distance(n, edge, t, v);
            if d + EPS < best {
                best = d;
                ties.clear();
                ties.push(v);
            } else if (d - best).abs() <= EPS {
                ties.push(v);
            }
        }
        let chosen = ties[rng.random_range(0..ties.len())];
        let next = bits | 1 << chosen;
        acc += best + table.value_bits(next);
    }
    acc / samples as f64
}
