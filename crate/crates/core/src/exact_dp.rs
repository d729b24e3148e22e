//! Exact evaluation of the expected remaining assignment cost by backward
//! induction over occupancy states.
//!
//! For each state S the expected remaining cost V(S) averages, over a
//! uniform edge and a uniform position on it, the immediate nearest-free
//! cost plus the value of the successor state. The integrand is affine on
//! each [`Segment`] of the edge's cost profile, so every integral is
//! evaluated exactly as midpoint times length; no quadrature error enters.
//!
//! Two drivers share that per-edge integral: [`value_function`] stores one
//! value per dihedral orbit (successor lookups canonicalize first), while
//! [`value_function_full`] fills all 2^n states without any symmetry
//! machinery and exists to cross-check the reduction.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::dihedral::{canonicalize, enumerate_canonical_states, masks_with_popcount, StateMask};
use crate::error::Error;
use crate::geometry::{cost_profile, EdgeId, PolygonSize, TIE_TOLERANCE};

/// Default upper bound on n for the exact regime. A guard, not a hard
/// bound: the CLI can raise it up to [`MAX_EXACT_N`].
pub const DEFAULT_EXACT_LIMIT: usize = 16;

/// Hard ceiling of the exact regime: level enumeration walks word-sized
/// masks.
pub const MAX_EXACT_N: usize = 64;

/// Hard cap for dense 2^n tables (8 MiB of f64 at n = 20).
pub const FULL_TABLE_LIMIT: usize = 20;

/// Expected remaining cost per canonical occupancy state.
#[derive(Clone, Debug)]
pub struct ValueTable {
    n: PolygonSize,
    values: HashMap<u128, f64>,
}

impl ValueTable {
    pub fn new(n: PolygonSize) -> Self {
        ValueTable {
            n,
            values: HashMap::new(),
        }
    }

    pub fn n(&self) -> PolygonSize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Inserts a value for a state key as given. Keys are expected to be
    /// canonical; [`save_table`] rejects tables where they are not.
    pub fn insert(&mut self, state: StateMask, value: f64) {
        self.values.insert(state.bits(), value);
    }

    /// Value for an arbitrary state: the key is canonicalized before the
    /// lookup. Panics if the orbit is missing, which indicates a bug in the
    /// level scheduling.
    pub fn value(&self, state: StateMask) -> f64 {
        let canon = canonicalize(state);
        *self
            .values
            .get(&canon.bits())
            .unwrap_or_else(|| panic!("missing value for canonical state {:#b}", canon.bits()))
    }

    pub fn get_raw(&self, bits: u128) -> Option<f64> {
        self.values.get(&bits).copied()
    }

    /// Expected total cost from the empty polygon.
    pub fn expected_total(&self) -> f64 {
        self.value(StateMask::empty(self.n))
    }

    /// Rows sorted by (popcount descending, mask ascending).
    pub fn rows(&self) -> Vec<(u128, f64)> {
        let mut rows: Vec<(u128, f64)> = self.values.iter().map(|(&m, &v)| (m, v)).collect();
        rows.sort_by_key(|&(m, _)| (std::cmp::Reverse(m.count_ones()), m));
        rows
    }
}

/// Dense value table over all 2^n raw states, indexed by mask bits.
#[derive(Clone, Debug)]
pub struct FullStateTable {
    n: PolygonSize,
    values: Vec<f64>,
}

impl FullStateTable {
    pub(crate) fn zeroed(n: PolygonSize) -> Result<Self, Error> {
        if n.get() > FULL_TABLE_LIMIT {
            return Err(Error::StateSpaceTooLarge {
                n: n.get(),
                limit: FULL_TABLE_LIMIT,
            });
        }
        Ok(FullStateTable {
            n,
            values: vec![0.0; 1 << n.get()],
        })
    }

    pub(crate) fn set_bits(&mut self, bits: u128, value: f64) {
        self.values[bits as usize] = value;
    }

    pub fn n(&self) -> PolygonSize {
        self.n
    }

    pub fn value(&self, state: StateMask) -> f64 {
        self.values[state.bits() as usize]
    }

    pub fn value_bits(&self, bits: u128) -> f64 {
        self.values[bits as usize]
    }

    pub fn at_empty(&self) -> f64 {
        self.values[0]
    }
}

/// One successor of a state under the greedy rule, with its edge- and
/// position-averaged transition probability and immediate-cost share.
#[derive(Clone, Debug)]
pub struct SuccessorArc {
    pub vertex: usize,
    pub probability: f64,
    pub immediate_cost: f64,
}

/// Edge- and position-averaged one-step dynamics out of a state.
#[derive(Clone, Debug)]
pub struct TransitionRow {
    pub state: StateMask,
    /// Free vertices in ascending order; probabilities sum to 1.
    pub successors: Vec<SuccessorArc>,
    /// Expected immediate assignment cost from this state.
    pub immediate_cost: f64,
}

/// Exact integral over t ∈ [0,1] of the immediate cost plus the expected
/// successor value, for one state and one arrival edge.
///
/// Per segment the immediate part is affine (midpoint × length) and the
/// successor part is constant: ties split uniformly over the minimizer set.
pub fn edge_integral<F>(state: StateMask, edge: EdgeId, successor_value: F) -> f64
where
    F: Fn(StateMask) -> f64,
{
    assert!(!state.is_full(), "edge_integral on a full state");
    let mut acc = 0.0;
    for seg in cost_profile(state, edge, TIE_TOLERANCE) {
        let len = seg.length();
        let immediate = seg.cost_at(0.5 * (seg.lo + seg.hi)) * len;
        let share = len / seg.minimizers.len() as f64;
        let future: f64 = seg
            .minimizers
            .iter()
            .map(|&v| successor_value(state.with(v)))
            .sum::<f64>()
            * share;
        acc += immediate + future;
    }
    acc
}

/// Symmetry-reduced backward induction with the default exact-mode limit.
pub fn value_function(n: PolygonSize) -> Result<ValueTable, Error> {
    value_function_with_limit(n, DEFAULT_EXACT_LIMIT)
}

/// Symmetry-reduced backward induction: one stored value per dihedral
/// orbit, levels processed from |S| = n − 1 down to 0. States within a
/// level are independent and evaluated in parallel; results are identical
/// for any worker count.
pub fn value_function_with_limit(n: PolygonSize, limit: usize) -> Result<ValueTable, Error> {
    let limit = limit.min(MAX_EXACT_N);
    if n.get() > limit {
        return Err(Error::ExactLimitExceeded { n: n.get(), limit });
    }
    let mut table = ValueTable::new(n);
    table.insert(StateMask::full(n), 0.0);
    let edge_count = n.get() as f64;
    for k in (0..n.get()).rev() {
        let states = enumerate_canonical_states(n, k);
        let level: Vec<(StateMask, f64)> = states
            .into_par_iter()
            .map(|state| {
                let total: f64 = n
                    .edges()
                    .map(|e| edge_integral(state, e, |succ| table.value(succ)))
                    .sum();
                (state, total / edge_count)
            })
            .collect();
        for (state, value) in level {
            table.insert(state, value);
        }
    }
    Ok(table)
}

/// Backward induction over all 2^n raw states with no canonicalization
/// anywhere; the cross-check target for the symmetry-reduced table.
pub fn value_function_full(n: PolygonSize) -> Result<FullStateTable, Error> {
    let mut table = FullStateTable::zeroed(n)?;
    let edge_count = n.get() as f64;
    for k in (0..n.get()).rev() {
        let masks: Vec<u128> = masks_with_popcount(n.get(), k).collect();
        let level: Vec<(u128, f64)> = masks
            .into_par_iter()
            .map(|bits| {
                let state = StateMask::from_bits(n, bits).expect("mask within range");
                let total: f64 = n
                    .edges()
                    .map(|e| edge_integral(state, e, |succ| table.value(succ)))
                    .sum();
                (bits, total / edge_count)
            })
            .collect();
        for (bits, value) in level {
            table.values[bits as usize] = value;
        }
    }
    Ok(table)
}

/// Edge- and position-averaged transition probabilities and immediate cost
/// out of one state.
pub fn transition_kernel(state: StateMask) -> TransitionRow {
    assert!(!state.is_full(), "transition_kernel on a full state");
    let n = state.n();
    let mut probability = vec![0.0; n.get()];
    let mut cost_share = vec![0.0; n.get()];
    let mut immediate = 0.0;
    for e in n.edges() {
        for seg in cost_profile(state, e, TIE_TOLERANCE) {
            let len = seg.length();
            let seg_cost = seg.cost_at(0.5 * (seg.lo + seg.hi)) * len;
            immediate += seg_cost;
            let share = 1.0 / seg.minimizers.len() as f64;
            for &v in &seg.minimizers {
                probability[v] += share * len;
                cost_share[v] += share * seg_cost;
            }
        }
    }
    let edge_count = n.get() as f64;
    let successors = state
        .free_vertices()
        .map(|v| SuccessorArc {
            vertex: v,
            probability: probability[v] / edge_count,
            immediate_cost: cost_share[v] / edge_count,
        })
        .collect();
    TransitionRow {
        state,
        successors,
        immediate_cost: immediate / edge_count,
    }
}

/// Expected cost of each arrival k = 1..n from the empty polygon, with the
/// default exact-mode limit.
pub fn per_arrival_expectations(n: PolygonSize) -> Result<Vec<f64>, Error> {
    per_arrival_expectations_with_limit(n, DEFAULT_EXACT_LIMIT)
}

/// Forward pass pushing orbit reach probabilities through the canonicalized
/// transition kernel, starting from mass 1 on the empty state. Entry k is
/// the expected cost of arrival k + 1; the entries sum to the expected
/// total.
pub fn per_arrival_expectations_with_limit(
    n: PolygonSize,
    limit: usize,
) -> Result<Vec<f64>, Error> {
    let limit = limit.min(MAX_EXACT_N);
    if n.get() > limit {
        return Err(Error::ExactLimitExceeded { n: n.get(), limit });
    }
    let mut mass: HashMap<u128, f64> = HashMap::new();
    mass.insert(0, 1.0);
    let mut expectations = Vec::with_capacity(n.get());
    for k in 0..n.get() {
        let mut expected = 0.0;
        let mut next: HashMap<u128, f64> = HashMap::new();
        // Ascending canonical order keeps the floating-point accumulation
        // order fixed.
        for state in enumerate_canonical_states(n, k) {
            let Some(&p) = mass.get(&state.bits()) else {
                continue;
            };
            let row = transition_kernel(state);
            expected += p * row.immediate_cost;
            for arc in &row.successors {
                let succ = canonicalize(state.with(arc.vertex));
                *next.entry(succ.bits()).or_insert(0.0) += p * arc.probability;
            }
        }
        expectations.push(expected);
        mass = next;
    }
    Ok(expectations)
}

/// Writes a value table: a `# n=<n>` binding line, a fixed CSV header, and
/// one row per canonical state sorted by (popcount desc, mask asc), values
/// rendered with 17 significant digits so they round-trip bit-exactly.
pub fn write_table<W: Write>(table: &ValueTable, mut out: W) -> Result<(), Error> {
    let rows = table.rows();
    for &(mask, _) in &rows {
        let state = StateMask::from_bits(table.n(), mask).expect("key within range");
        if canonicalize(state).bits() != mask {
            return Err(Error::NonCanonicalKey { mask });
        }
    }
    writeln!(out, "# n={}", table.n().get())?;
    writeln!(out, "mask,popcount,value")?;
    for (mask, value) in rows {
        writeln!(out, "{},{},{:.16e}", mask, mask.count_ones(), value)?;
    }
    Ok(())
}

pub fn save_table<P: AsRef<Path>>(table: &ValueTable, path: P) -> Result<(), Error> {
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);
    write_table(table, &mut writer)?;
    writer.flush()?;
    Ok(())
}

/// Parses a value table, reporting the offending line and field on error.
pub fn read_table<R: BufRead>(reader: R) -> Result<ValueTable, Error> {
    let parse = |line: usize, field: &'static str, message: String| Error::TableParse {
        line,
        field,
        message,
    };
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse(1, "header", "empty file".into()))?;
    let header = header?;
    let n_str = header
        .strip_prefix("# n=")
        .ok_or_else(|| parse(1, "header", format!("expected `# n=<n>`, got `{header}`")))?;
    let n_value: usize = n_str
        .trim()
        .parse()
        .map_err(|e| parse(1, "n", format!("{e}")))?;
    let n = PolygonSize::new(n_value)?;

    let (_, columns) = lines
        .next()
        .ok_or_else(|| parse(2, "columns", "missing column header".into()))?;
    let columns = columns?;
    if columns != "mask,popcount,value" {
        return Err(parse(
            2,
            "columns",
            format!("expected `mask,popcount,value`, got `{columns}`"),
        ));
    }

    let mut table = ValueTable::new(n);
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mask_str = fields
            .next()
            .ok_or_else(|| parse(line_no, "mask", "missing".into()))?;
        let pc_str = fields
            .next()
            .ok_or_else(|| parse(line_no, "popcount", "missing".into()))?;
        let value_str = fields
            .next()
            .ok_or_else(|| parse(line_no, "value", "missing".into()))?;
        if fields.next().is_some() {
            return Err(parse(line_no, "value", "trailing fields".into()));
        }

        let mask: u128 = mask_str
            .parse()
            .map_err(|e| parse(line_no, "mask", format!("{e}")))?;
        let state = StateMask::from_bits(n, mask)
            .map_err(|e| parse(line_no, "mask", format!("{e}")))?;
        if canonicalize(state).bits() != mask {
            return Err(parse(line_no, "mask", format!("{mask} is not canonical")));
        }
        let pc: usize = pc_str
            .parse()
            .map_err(|e| parse(line_no, "popcount", format!("{e}")))?;
        if pc != state.popcount() {
            return Err(parse(
                line_no,
                "popcount",
                format!("mask {mask} has popcount {}, row says {pc}", state.popcount()),
            ));
        }
        let value: f64 = value_str
            .parse()
            .map_err(|e| parse(line_no, "value", format!("{e}")))?;
        if table.values.insert(mask, value).is_some() {
            return Err(parse(line_no, "mask", format!("duplicate mask {mask}")));
        }
    }
    Ok(table)
}

pub fn load_table<P: AsRef<Path>>(path: P) -> Result<ValueTable, Error> {
    let file = File::open(path)?;
    read_table(BufReader::new(file))
}
