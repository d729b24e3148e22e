//! Occupancy states as bitmasks and the dihedral group action on them.
//!
//! The 2n rotations and reflections of the n-gon permute vertex labels and
//! therefore act on occupancy states. Every orbit is represented by its
//! integer-minimal member, which is the key used by the symmetry-reduced
//! value tables.

use crate::error::Error;
use crate::geometry::PolygonSize;

/// Occupancy of the n facilities as an n-bit vector; bit v is set iff the
/// facility at vertex v is occupied.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct StateMask {
    bits: u128,
    n: PolygonSize,
}

impl StateMask {
    /// The all-free state.
    pub fn empty(n: PolygonSize) -> Self {
        StateMask { bits: 0, n }
    }

    /// The all-occupied state.
    pub fn full(n: PolygonSize) -> Self {
        StateMask {
            bits: low_bits(n.get()),
            n,
        }
    }

    /// Builds a state from raw bits, rejecting bits at or above vertex n.
    pub fn from_bits(n: PolygonSize, bits: u128) -> Result<Self, Error> {
        if bits & !low_bits(n.get()) != 0 {
            return Err(Error::InvalidStateMask { bits, n: n.get() });
        }
        Ok(StateMask { bits, n })
    }

    /// Builds a state with the given vertices occupied.
    pub fn from_vertices(n: PolygonSize, vertices: &[usize]) -> Self {
        let mut bits = 0u128;
        for &v in vertices {
            assert!(v < n.get(), "vertex {v} out of range for n={}", n.get());
            bits |= 1 << v;
        }
        StateMask { bits, n }
    }

    pub fn n(self) -> PolygonSize {
        self.n
    }

    pub fn bits(self) -> u128 {
        self.bits
    }

    pub fn contains(self, v: usize) -> bool {
        debug_assert!(v < self.n.get());
        self.bits >> v & 1 == 1
    }

    /// Returns the state with vertex v additionally occupied.
    pub fn with(self, v: usize) -> Self {
        assert!(v < self.n.get(), "vertex {v} out of range");
        StateMask {
            bits: self.bits | 1 << v,
            n: self.n,
        }
    }

    pub fn popcount(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn is_full(self) -> bool {
        self.bits == low_bits(self.n.get())
    }

    /// Vertices whose facility is still free, in ascending order.
    pub fn free_vertices(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..self.n.get()).filter(move |v| bits >> v & 1 == 0)
    }

    /// Vertices whose facility is occupied, in ascending order.
    pub fn occupied_vertices(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..self.n.get()).filter(move |v| bits >> v & 1 == 1)
    }
}

fn low_bits(n: usize) -> u128 {
    if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// One element of the dihedral group D_n.
///
/// Vertex v maps to (rotation + v) mod n when `reflected` is false and to
/// (rotation − v) mod n when it is true; the 2n distinct pairs enumerate
/// the group exactly.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Symmetry {
    pub rotation: usize,
    pub reflected: bool,
}

impl Symmetry {
    pub fn identity() -> Self {
        Symmetry {
            rotation: 0,
            reflected: false,
        }
    }

    /// All 2n group elements: rotations first, then reflections.
    pub fn all(n: PolygonSize) -> impl Iterator<Item = Symmetry> {
        let n = n.get();
        (0..2 * n).map(move |i| Symmetry {
            rotation: i % n,
            reflected: i >= n,
        })
    }

    /// Image of vertex v under this symmetry.
    pub fn apply_vertex(self, v: usize, n: PolygonSize) -> usize {
        let n = n.get();
        debug_assert!(v < n && self.rotation < n);
        if self.reflected {
            (self.rotation + n - v) % n
        } else {
            (self.rotation + v) % n
        }
    }

    /// Composition `self ∘ other`: first apply `other`, then `self`.
    pub fn compose(self, other: Symmetry, n: PolygonSize) -> Symmetry {
        let n = n.get();
        let rotation = if self.reflected {
            (self.rotation + n - other.rotation) % n
        } else {
            (self.rotation + other.rotation) % n
        };
        Symmetry {
            rotation,
            reflected: self.reflected ^ other.reflected,
        }
    }
}

/// Image of an occupancy state under a dihedral symmetry: bit g(v) of the
/// result is set iff bit v of the input is set.
pub fn apply_symmetry(mask: StateMask, g: Symmetry) -> StateMask {
    let n = mask.n();
    let mut bits = 0u128;
    for v in mask.occupied_vertices() {
        bits |= 1 << g.apply_vertex(v, n);
    }
    StateMask { bits, n }
}

/// The orbit-minimal representative of `mask` under all 2n dihedral images,
/// minimal in ordinary unsigned integer order of the bit patterns.
pub fn canonicalize(mask: StateMask) -> StateMask {
    let mut best = mask.bits();
    for g in Symmetry::all(mask.n()) {
        let image = apply_symmetry(mask, g).bits();
        if image < best {
            best = image;
        }
    }
    StateMask {
        bits: best,
        n: mask.n(),
    }
}

/// One representative per dihedral orbit of the size-`popcount` subsets,
/// each its own canonical form, sorted ascending by integer value.
///
/// Serves the exact regime only: n is capped at 64 by the level
/// enumeration.
pub fn enumerate_canonical_states(n: PolygonSize, popcount: usize) -> Vec<StateMask> {
    assert!(popcount <= n.get(), "popcount {popcount} exceeds n={}", n.get());
    masks_with_popcount(n.get(), popcount)
        .map(|bits| StateMask { bits, n })
        .filter(|&m| canonicalize(m).bits() == m.bits())
        .collect()
}

/// All n-bit masks with the given popcount in ascending order (Gosper's hack).
///
/// Level enumeration only serves the exact regime, so n stays word-sized.
pub(crate) fn masks_with_popcount(n: usize, popcount: usize) -> impl Iterator<Item = u128> {
    assert!(n <= 64, "level enumeration is limited to n <= 64");
    let limit = 1u128 << n;
    let mut next: u128 = if popcount == 0 {
        0
    } else {
        (1u128 << popcount) - 1
    };
    let mut exhausted = false;
    std::iter::from_fn(move || {
        if exhausted || next >= limit {
            return None;
        }
        let current = next;
        if next == 0 {
            exhausted = true;
        } else {
            let lowest = next & next.wrapping_neg();
            let ripple = next + lowest;
            next = ripple | ((next ^ ripple) / lowest) >> 2;
        }
        Some(current)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: usize) -> PolygonSize {
        PolygonSize::new(v).unwrap()
    }

    fn mask(size: usize, vertices: &[usize]) -> StateMask {
        StateMask::from_vertices(n(size), vertices)
    }

    #[test]
    fn rotation_moves_single_bit() {
        let g = Symmetry {
            rotation: 1,
            reflected: false,
        };
        assert_eq!(apply_symmetry(mask(4, &[0]), g), mask(4, &[1]));
    }

    #[test]
    fn reflection_of_adjacent_pair() {
        // v ↦ −v mod 4 sends {0,1} to {0,3}; verified per vertex.
        let g = Symmetry {
            rotation: 0,
            reflected: true,
        };
        assert_eq!(g.apply_vertex(0, n(4)), 0);
        assert_eq!(g.apply_vertex(1, n(4)), 3);
        assert_eq!(apply_symmetry(mask(4, &[0, 1]), g), mask(4, &[0, 3]));
    }

    #[test]
    fn empty_state_fixed_by_all_symmetries() {
        for g in Symmetry::all(n(6)) {
            assert!(apply_symmetry(mask(6, &[]), g).is_empty());
        }
    }

    #[test]
    fn popcount_preserved_by_action() {
        let m = mask(7, &[0, 2, 3]);
        for g in Symmetry::all(n(7)) {
            assert_eq!(apply_symmetry(m, g).popcount(), 3);
        }
    }

    #[test]
    fn canonical_singleton_is_bit_zero() {
        assert_eq!(canonicalize(mask(4, &[2])), mask(4, &[0]));
    }

    #[test]
    fn canonical_opposite_pair() {
        // Oracle: enumerate all 8 images by explicit vertex maps, take the
        // integer minimum.
        let m = mask(4, &[1, 3]);
        let mut images = Vec::new();
        for r in 0..4usize {
            for refl in [false, true] {
                let mut bits = 0u128;
                for v in [1usize, 3] {
                    let image = if refl { (r + 4 - v) % 4 } else { (r + v) % 4 };
                    bits |= 1 << image;
                }
                images.push(bits);
            }
        }
        let expected = images.into_iter().min().unwrap();
        assert_eq!(canonicalize(m).bits(), expected);
        assert_eq!(canonicalize(m), mask(4, &[0, 2]));
    }

    #[test]
    fn canonical_hexagon_triple() {
        // Exhaustive image enumeration puts {0,1,3} at the orbit minimum.
        let m = mask(6, &[0, 1, 3]);
        let expected = Symmetry::all(n(6))
            .map(|g| apply_symmetry(m, g).bits())
            .min()
            .unwrap();
        assert_eq!(expected, m.bits());
        assert_eq!(canonicalize(m), m);
    }

    #[test]
    fn enumerate_square_states() {
        let empty = enumerate_canonical_states(n(4), 0);
        assert_eq!(empty, vec![mask(4, &[])]);

        // Two orbits of pairs: adjacent and opposite.
        let pairs = enumerate_canonical_states(n(4), 2);
        assert_eq!(pairs, vec![mask(4, &[0, 1]), mask(4, &[0, 2])]);
    }

    #[test]
    fn hexagon_orbit_total() {
        // Brute-force orbit count over all 64 subsets of the hexagon.
        let total: usize = (0..=6)
            .map(|k| enumerate_canonical_states(n(6), k).len())
            .sum();
        assert_eq!(total, 13);
    }

    #[test]
    fn from_bits_rejects_high_bits() {
        assert!(StateMask::from_bits(n(4), 0b10000).is_err());
        assert!(StateMask::from_bits(n(4), 0b1111).is_ok());
    }

    #[test]
    fn gosper_covers_all_masks() {
        for size in [1usize, 4, 6] {
            let mut seen = 0usize;
            for k in 0..=size {
                let level: Vec<u128> = masks_with_popcount(size, k).collect();
                assert!(level.windows(2).all(|w| w[0] < w[1]));
                assert!(level
                    .iter()
                    .all(|&m| m.count_ones() as usize == k && m < 1 << size));
                seen += level.len();
            }
            assert_eq!(seen, 1 << size);
        }
    }
}
