//! The red-black graph: a bipartite species/character graph whose edge
//! colours track which extended-matrix pairs are `(1,0)` (black) and which
//! were completed to `(1,1)` by realizing a character (red).
//!
//! A character is *active* once realized. Every edge of an inactive
//! character is black and every edge of an active one is red, so colour is
//! stored once per character instead of once per edge.

use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::GraphError;
use crate::log::{Event, RealizationLog};
use crate::matrix::{Completion, CompletionRecord, ExtendedMatrix, PairState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeColor {
    Black,
    Red,
}

/// Nodes of one connected component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub species: FixedBitSet,
    pub characters: FixedBitSet,
}

impl Component {
    pub fn size(&self) -> usize {
        self.species.count_ones(..) + self.characters.count_ones(..)
    }
}

/// A red path `s1 – c – s2 – c' – s3`: `s1` is adjacent to `c` only, `s3`
/// to `c'` only and `s2` to both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigmaWitness {
    pub characters: (usize, usize),
    pub species: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedBlackGraph {
    n_species: usize,
    /// Species adjacent to each character, either colour.
    adjacency: Vec<FixedBitSet>,
    active: FixedBitSet,
    freed: FixedBitSet,
    retired: FixedBitSet,
}

impl RedBlackGraph {
    /// Black edge at every `(1,0)` pair of a freshly built extended matrix.
    pub fn from_extended(me: &ExtendedMatrix) -> Self {
        let m = me.n_characters();
        let n = me.n_species();
        let adjacency: Vec<FixedBitSet> = (0..m).map(|c| me.present(c).clone()).collect();
        let mut g = Self {
            n_species: n,
            adjacency,
            active: FixedBitSet::with_capacity(m),
            freed: FixedBitSet::with_capacity(m),
            retired: FixedBitSet::with_capacity(n),
        };
        // Species with an all-zero row start out isolated.
        let covered = g.covered_species();
        for s in 0..n {
            if !covered.contains(s) {
                g.retired.insert(s);
            }
        }
        g
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn n_characters(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge(&self, character: usize, species: usize) -> Option<EdgeColor> {
        if !self.adjacency[character].contains(species) {
            None
        } else if self.active.contains(character) {
            Some(EdgeColor::Red)
        } else {
            Some(EdgeColor::Black)
        }
    }

    /// All edges as `(character, species, colour)`, character-major.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EdgeColor)> + '_ {
        self.adjacency.iter().enumerate().flat_map(move |(c, adj)| {
            let color = if self.active.contains(c) {
                EdgeColor::Red
            } else {
                EdgeColor::Black
            };
            adj.ones().map(move |s| (c, s, color))
        })
    }

    pub fn neighbors(&self, character: usize) -> &FixedBitSet {
        &self.adjacency[character]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|a| a.count_ones(..)).sum()
    }

    /// No edges of either colour left.
    pub fn is_e_empty(&self) -> bool {
        self.adjacency.iter().all(FixedBitSet::is_clear)
    }

    pub fn is_active(&self, character: usize) -> bool {
        self.active.contains(character)
    }

    pub fn active(&self) -> &FixedBitSet {
        &self.active
    }

    pub fn is_free(&self, character: usize) -> bool {
        self.freed.contains(character)
    }

    /// A species is retired once it has no edges left.
    pub fn is_retired(&self, species: usize) -> bool {
        self.retired.contains(species)
    }

    pub fn species_degree(&self, species: usize) -> usize {
        self.adjacency
            .iter()
            .filter(|a| a.contains(species))
            .count()
    }

    pub fn black_degree(&self, character: usize) -> usize {
        if self.active.contains(character) {
            0
        } else {
            self.adjacency[character].count_ones(..)
        }
    }

    /// Nodes reachable from a character through edges of either colour.
    pub fn component_of(&self, character: usize) -> Component {
        let m = self.n_characters();
        let mut species = FixedBitSet::with_capacity(self.n_species);
        let mut characters = FixedBitSet::with_capacity(m);
        characters.insert(character);
        let mut stack = vec![character];
        while let Some(c) = stack.pop() {
            let fresh: Vec<usize> = self.adjacency[c].difference(&species).collect();
            if fresh.is_empty() {
                continue;
            }
            for s in fresh {
                species.insert(s);
            }
            for other in 0..m {
                if !characters.contains(other) && !self.adjacency[other].is_disjoint(&species) {
                    characters.insert(other);
                    stack.push(other);
                }
            }
        }
        Component {
            species,
            characters,
        }
    }

    /// Realizes an inactive character: red edges to every species of its
    /// component it was not adjacent to, its black edges removed, then free
    /// characters and isolated species cleaned up to a fixed point. The
    /// canonical completion of the character is written into `me`.
    pub fn realize(
        &mut self,
        character: usize,
        me: &mut ExtendedMatrix,
        log: &mut RealizationLog,
    ) -> Result<(), GraphError> {
        if character >= self.n_characters() {
            return Err(GraphError::UnknownCharacter(character));
        }
        if me.n_characters() != self.n_characters() || me.n_species() != self.n_species {
            return Err(GraphError::DimensionMismatch);
        }
        if self.active.contains(character) {
            return Err(GraphError::DuplicateRealization(character));
        }
        let component = self.component_of(character);
        me.complete_character(character, &component.species);

        let mut red = component.species.clone();
        red.difference_with(&self.adjacency[character]);
        self.adjacency[character] = red;
        self.active.insert(character);
        log.push(Event::CharacterRealized {
            character,
            component: component.species,
        });

        self.retire_isolated(log);
        self.free_cascade(log);
        Ok(())
    }

    /// Repeatedly frees the lowest-indexed active character that is red
    /// adjacent to every species of its component.
    fn free_cascade(&mut self, log: &mut RealizationLog) {
        'scan: loop {
            for c in self.active.ones() {
                if self.freed.contains(c) {
                    continue;
                }
                let component = self.component_of(c);
                if component.species.is_subset(&self.adjacency[c]) {
                    self.adjacency[c].clear();
                    self.freed.insert(c);
                    log.push(Event::CharacterFreed {
                        character: c,
                        component: component.species,
                    });
                    self.retire_isolated(log);
                    continue 'scan;
                }
            }
            break;
        }
    }

    fn covered_species(&self) -> FixedBitSet {
        let mut covered = FixedBitSet::with_capacity(self.n_species);
        for adj in &self.adjacency {
            covered.union_with(adj);
        }
        covered
    }

    fn retire_isolated(&mut self, log: &mut RealizationLog) {
        let covered = self.covered_species();
        for s in 0..self.n_species {
            if !covered.contains(s) && !self.retired.contains(s) {
                self.retired.insert(s);
                log.push(Event::SpeciesRealized { species: s });
            }
        }
    }

    /// Looks for two active characters whose red neighbourhoods overlap
    /// without being nested. Pairs are scanned in ascending order and the
    /// smallest species of each part is reported.
    pub fn find_sigma(&self) -> Option<SigmaWitness> {
        let active: Vec<usize> = self.active.ones().collect();
        for (i, &c) in active.iter().enumerate() {
            let a = &self.adjacency[c];
            if a.is_clear() {
                continue;
            }
            for &d in &active[i + 1..] {
                let b = &self.adjacency[d];
                let Some(shared) = a.intersection(b).next() else {
                    continue;
                };
                let Some(left) = a.difference(b).next() else {
                    continue;
                };
                let Some(right) = b.difference(a).next() else {
                    continue;
                };
                return Some(SigmaWitness {
                    characters: (c, d),
                    species: [left, shared, right],
                });
            }
        }
        None
    }

    /// Checks the colour invariants against an extended matrix: black edges
    /// sit on `(1,0)` pairs of inactive characters and red edges on `(1,1)`
    /// pairs of active ones. Returns a description of the first mismatch.
    pub fn coherence_error(&self, me: &ExtendedMatrix) -> Option<String> {
        for c in 0..self.n_characters() {
            for s in self.adjacency[c].ones() {
                let expected = if self.active.contains(c) {
                    PairState::Persistent
                } else {
                    PairState::Present
                };
                if me.pair(s, c) != expected {
                    return Some(format!(
                        "edge ({c}, {s}) has pair {:?}, expected {expected:?}",
                        me.pair(s, c)
                    ));
                }
            }
            if self.active.contains(c) && !self.freed.contains(c) {
                for s in me.persistent(c).ones() {
                    if !self.adjacency[c].contains(s) {
                        return Some(format!("active {c} lost its red edge to {s}"));
                    }
                }
            }
        }
        None
    }
}

impl fmt::Display for RedBlackGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, s, color) in self.edges() {
            let tag = match color {
                EdgeColor::Black => "black",
                EdgeColor::Red => "red",
            };
            writeln!(f, "c{} - s{} {tag}", c + 1, s + 1)?;
        }
        Ok(())
    }
}

/// The result of realizing a sequence of characters from scratch.
#[derive(Debug, Clone)]
pub struct Replay {
    pub graph: RedBlackGraph,
    pub matrix: ExtendedMatrix,
    pub log: RealizationLog,
    pub realized: Vec<usize>,
}

impl Replay {
    pub fn start(me: &ExtendedMatrix) -> Self {
        Self {
            graph: RedBlackGraph::from_extended(me),
            matrix: me.clone(),
            log: RealizationLog::default(),
            realized: Vec::new(),
        }
    }

    pub fn realize(&mut self, character: usize) -> Result<(), GraphError> {
        self.graph
            .realize(character, &mut self.matrix, &mut self.log)?;
        self.realized.push(character);
        Ok(())
    }

    /// Every character realized and no edge left.
    pub fn is_successful(&self) -> bool {
        self.realized.len() == self.graph.n_characters() && self.graph.is_e_empty()
    }

    /// The completion induced by the realizations, once every character has
    /// been realized. Provenance follows realization order.
    pub fn completion(&self) -> Option<Completion> {
        let provenance = self
            .realized
            .iter()
            .map(|&c| CompletionRecord {
                character: c,
                species: self.matrix.persistent(c).clone(),
            })
            .collect();
        Completion::with_provenance(self.matrix.clone(), provenance).ok()
    }
}

/// Realizes `sequence` in order starting from the graph of `me`.
pub fn replay(me: &ExtendedMatrix, sequence: &[usize]) -> Result<Replay, GraphError> {
    let mut state = Replay::start(me);
    for &c in sequence {
        state.realize(c)?;
    }
    Ok(state)
}
