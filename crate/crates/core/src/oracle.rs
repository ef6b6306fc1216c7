//! Exhaustive reference solver. Tries every `(0,0)`/`(1,1)` assignment of the
//! unknown pairs and keeps the first completion free of the forbidden
//! submatrix. Exponential, so bounded by a cap on the number of unknowns.

use fixedbitset::FixedBitSet;

use crate::error::OracleError;
use crate::matrix::{
    has_forbidden_submatrix, BinaryMatrix, Completion, ConflictGraph, ExtendedMatrix,
};

pub const DEFAULT_CAP: usize = 24;

/// Unknown pairs in character-major order, as `(species, character)`.
fn unknown_pairs(me: &ExtendedMatrix) -> Vec<(usize, usize)> {
    (0..me.n_characters())
        .flat_map(|j| me.unknown(j).ones().map(move |s| (s, j)))
        .collect()
}

struct Enumeration {
    base: Vec<FixedBitSet>,
    pairs: Vec<(usize, usize)>,
}

impl Enumeration {
    fn new(me: &ExtendedMatrix) -> Self {
        let n = me.n_species();
        let mut base = Vec::with_capacity(2 * me.n_characters());
        for j in 0..me.n_characters() {
            let mut pos = me.present(j).clone();
            pos.union_with(me.persistent(j));
            base.push(pos);
            let mut neg = FixedBitSet::with_capacity(n);
            neg.union_with(me.persistent(j));
            base.push(neg);
        }
        Self {
            base,
            pairs: unknown_pairs(me),
        }
    }

    /// Bit `i` of `code` set means pair `i` becomes `(1,1)`.
    fn accepts(&self, code: u64) -> bool {
        let mut cols = self.base.clone();
        for (i, &(s, j)) in self.pairs.iter().enumerate() {
            if code >> i & 1 == 1 {
                cols[2 * j].insert(s);
                cols[2 * j + 1].insert(s);
            }
        }
        has_forbidden_submatrix(&cols).is_none()
    }

    fn completion(&self, me: &ExtendedMatrix, code: u64) -> Completion {
        let mut out = me.clone();
        for (i, &(s, j)) in self.pairs.iter().enumerate() {
            out.resolve_pair(s, j, code >> i & 1 == 1);
        }
        Completion::new(out).expect("every unknown pair was resolved")
    }
}

pub fn oracle_solve(me: &ExtendedMatrix) -> Result<Option<Completion>, OracleError> {
    oracle_solve_capped(me, DEFAULT_CAP)
}

pub fn oracle_solve_capped(
    me: &ExtendedMatrix,
    cap: usize,
) -> Result<Option<Completion>, OracleError> {
    oracle_solve_with(me, cap, cfg!(feature = "parallel"))
}

/// The first forbidden-free completion in binary-counter order over the
/// unknown pairs, or `None` when every completion is forbidden. The result
/// does not depend on `parallel`, which is ignored without the `parallel`
/// feature.
pub fn oracle_solve_with(
    me: &ExtendedMatrix,
    cap: usize,
    parallel: bool,
) -> Result<Option<Completion>, OracleError> {
    let e = Enumeration::new(me);
    let k = e.pairs.len();
    if k > cap.min(63) {
        return Err(OracleError::Budget { unknown: k, cap });
    }
    let total = 1u64 << k;
    Ok(first_accepted(&e, total, parallel).map(|code| e.completion(me, code)))
}

#[cfg(feature = "parallel")]
fn first_accepted(e: &Enumeration, total: u64, parallel: bool) -> Option<u64> {
    use rayon::prelude::*;
    const CHUNK: u64 = 1 << 12;
    if !parallel || total <= CHUNK {
        return (0..total).find(|&code| e.accepts(code));
    }
    (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .find_map_first(|chunk| {
            let lo = chunk * CHUNK;
            (lo..(lo + CHUNK).min(total)).find(|&code| e.accepts(code))
        })
}

#[cfg(not(feature = "parallel"))]
fn first_accepted(e: &Enumeration, total: u64, _parallel: bool) -> Option<u64> {
    (0..total).find(|&code| e.accepts(code))
}

/// Edges of the conflict graph.
pub fn count_conflicts(m: &BinaryMatrix) -> usize {
    ConflictGraph::build(m).edge_count()
}
