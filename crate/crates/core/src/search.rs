//! Depth-first branch and bound over character orderings.
//!
//! Every node of the decision tree realizes one more character on a private
//! copy of the graph and partial completion. A branch is cut as soon as the
//! graph holds a red Σ-path, which can never be removed by later
//! realizations. A full ordering that leaves no edge is a successful
//! reduction.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;

use crate::error::GraphError;
use crate::graph::{RedBlackGraph, Replay};
use crate::log::RealizationLog;
use crate::matrix::{has_forbidden_submatrix, Completion, ExtendedMatrix, ForbiddenWitness};

/// Order in which the children of a decision-tree node are tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidateOrder {
    /// Ascending character index.
    #[default]
    Lex,
    /// Characters in smaller components first, then higher black degree.
    ComponentDegree,
}

impl FromStr for CandidateOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lex" => Ok(Self::Lex),
            "component-degree" => Ok(Self::ComponentDegree),
            other => Err(format!("unknown order `{other}`")),
        }
    }
}

impl fmt::Display for CandidateOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lex => "lex",
            Self::ComponentDegree => "component-degree",
        })
    }
}

/// Skipping of already-failed sets of realized characters.
///
/// `Unsafe` assumes the graph reached depends only on the set of realized
/// characters and not on their order. That is unproven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MemoMode {
    #[default]
    Off,
    Unsafe,
}

impl FromStr for MemoMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(Self::Off),
            "unsafe" => Ok(Self::Unsafe),
            other => Err(format!("unknown memo mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub order: CandidateOrder,
    pub max_time: Option<Duration>,
    pub max_nodes: Option<u64>,
    pub memo: MemoMode,
    /// Cut branches holding a red Σ-path. Disabling only costs time.
    pub prune: bool,
    /// Also test the completed columns for a forbidden submatrix at every
    /// node and count disagreements with the Σ test.
    pub cross_check: bool,
    /// Explore the root's children on this many worker threads. `0` and `1`
    /// search sequentially.
    pub threads: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            order: CandidateOrder::Lex,
            max_time: None,
            max_nodes: None,
            memo: MemoMode::Off,
            prune: true,
            cross_check: false,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Timeout,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
            Status::Timeout => "TIMEOUT",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Decision-tree nodes expanded, one per realization.
    pub nodes: u64,
    pub prunes: u64,
    pub memo_hits: u64,
    /// Nodes where the Σ test and the forbidden-submatrix test disagreed.
    pub cross_check_mismatches: u64,
    pub elapsed: Duration,
}

#[cfg(feature = "parallel")]
impl SearchStats {
    fn merge(&mut self, other: &SearchStats) {
        self.nodes += other.nodes;
        self.prunes += other.prunes;
        self.memo_hits += other.memo_hits;
        self.cross_check_mismatches += other.cross_check_mismatches;
    }
}

/// An ordering of all characters whose realization empties the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction(pub Vec<usize>);

impl Reduction {
    pub fn characters(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: Status,
    pub reduction: Option<Reduction>,
    pub completion: Option<Completion>,
    pub log: Option<RealizationLog>,
    pub stats: SearchStats,
}

/// Graph, partial completion and realized prefix at one decision-tree node.
#[derive(Debug, Clone)]
pub struct SearchState {
    replay: Replay,
}

impl SearchState {
    pub fn new(me: &ExtendedMatrix) -> Self {
        Self {
            replay: Replay::start(me),
        }
    }

    pub fn graph(&self) -> &RedBlackGraph {
        &self.replay.graph
    }

    pub fn matrix(&self) -> &ExtendedMatrix {
        &self.replay.matrix
    }

    pub fn log(&self) -> &RealizationLog {
        &self.replay.log
    }

    pub fn realized(&self) -> &[usize] {
        &self.replay.realized
    }

    pub fn is_leaf(&self) -> bool {
        self.realized().len() == self.graph().n_characters()
    }

    pub fn is_successful(&self) -> bool {
        self.replay.is_successful()
    }

    /// Child state with one more realized character.
    pub fn advance(&self, character: usize) -> Result<SearchState, GraphError> {
        let mut child = self.clone();
        child.replay.realize(character)?;
        Ok(child)
    }

    pub fn into_replay(self) -> Replay {
        self.replay
    }
}

/// Whether the branch ending in `state` is dead: its graph holds a red
/// Σ-path.
pub fn prune(state: &SearchState) -> bool {
    state.graph().find_sigma().is_some()
}

/// The forbidden-submatrix test restricted to completed characters.
pub fn forbidden_in_completed(state: &SearchState) -> Option<ForbiddenWitness> {
    has_forbidden_submatrix(&state.matrix().completed_columns())
}

/// Inactive characters of `state`, ordered by `order`.
pub fn next_candidates(state: &SearchState, order: CandidateOrder) -> Vec<usize> {
    let g = state.graph();
    let inactive = (0..g.n_characters()).filter(|&c| !g.is_active(c));
    match order {
        CandidateOrder::Lex => inactive.collect(),
        CandidateOrder::ComponentDegree => {
            let mut keyed: Vec<(usize, std::cmp::Reverse<usize>, usize)> = inactive
                .map(|c| {
                    (
                        g.component_of(c).size(),
                        std::cmp::Reverse(g.black_degree(c)),
                        c,
                    )
                })
                .collect();
            keyed.sort_unstable();
            keyed.into_iter().map(|(_, _, c)| c).collect()
        }
    }
}

struct Budget {
    deadline: Option<Instant>,
    max_nodes: Option<u64>,
    nodes: AtomicU64,
    exhausted: AtomicBool,
}

impl Budget {
    fn new(opts: &SearchOptions, start: Instant) -> Self {
        Self {
            deadline: opts.max_time.map(|d| start + d),
            max_nodes: opts.max_nodes,
            nodes: AtomicU64::new(0),
            exhausted: AtomicBool::new(false),
        }
    }

    /// Accounts for one expansion; `false` once either budget is spent.
    fn charge(&self) -> bool {
        if self.exhausted.load(AtomicOrdering::Relaxed) {
            return false;
        }
        let used = self.nodes.fetch_add(1, AtomicOrdering::Relaxed) + 1;
        let over_nodes = self.max_nodes.is_some_and(|max| used > max);
        let over_time = self.deadline.is_some_and(|d| Instant::now() >= d);
        if over_nodes || over_time {
            self.exhausted.store(true, AtomicOrdering::Relaxed);
            return false;
        }
        true
    }
}

struct Interrupted;

struct Searcher<'a> {
    opts: &'a SearchOptions,
    budget: &'a Budget,
    stats: SearchStats,
    failed: HashSet<FixedBitSet>,
}

impl<'a> Searcher<'a> {
    fn new(opts: &'a SearchOptions, budget: &'a Budget) -> Self {
        Self {
            opts,
            budget,
            stats: SearchStats::default(),
            failed: HashSet::new(),
        }
    }

    /// Expands one child. `Ok(Some)` carries a successful leaf.
    fn visit(&mut self, state: &SearchState, c: usize) -> Result<Option<SearchState>, Interrupted> {
        if !self.budget.charge() {
            return Err(Interrupted);
        }
        self.stats.nodes += 1;
        let child = state
            .advance(c)
            .expect("candidates are inactive characters of the state");

        if self.opts.cross_check {
            let sigma = prune(&child);
            let forbidden = forbidden_in_completed(&child).is_some();
            if sigma != forbidden {
                self.stats.cross_check_mismatches += 1;
            }
        }
        if self.opts.prune && prune(&child) {
            self.stats.prunes += 1;
            return Ok(None);
        }
        if child.is_leaf() {
            return Ok(child.is_successful().then_some(child));
        }
        if self.opts.memo == MemoMode::Unsafe && self.failed.contains(child.graph().active()) {
            self.stats.memo_hits += 1;
            return Ok(None);
        }
        let found = self.descend(&child)?;
        if found.is_none() && self.opts.memo == MemoMode::Unsafe {
            self.failed.insert(child.graph().active().clone());
        }
        Ok(found)
    }

    fn descend(&mut self, state: &SearchState) -> Result<Option<SearchState>, Interrupted> {
        for c in next_candidates(state, self.opts.order) {
            if let Some(found) = self.visit(state, c)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }
}

/// Searches for a successful reduction of the red-black graph of `me`.
pub fn decide_pp(me: &ExtendedMatrix, opts: &SearchOptions) -> SolveOutcome {
    let start = Instant::now();
    let budget = Budget::new(opts, start);
    let root = SearchState::new(me);

    let (result, mut stats) = if root.is_leaf() {
        (
            Ok(root.is_successful().then_some(root)),
            SearchStats::default(),
        )
    } else if opts.threads > 1 {
        search_parallel(&root, opts, &budget)
    } else {
        let mut searcher = Searcher::new(opts, &budget);
        let result = searcher.descend(&root);
        (result, searcher.stats)
    };
    stats.elapsed = start.elapsed();

    match result {
        Ok(Some(found)) => {
            let replay = found.into_replay();
            let completion = replay.completion();
            SolveOutcome {
                status: Status::Sat,
                reduction: Some(Reduction(replay.realized.clone())),
                completion,
                log: Some(replay.log),
                stats,
            }
        }
        Ok(None) => SolveOutcome {
            status: Status::Unsat,
            reduction: None,
            completion: None,
            log: None,
            stats,
        },
        Err(Interrupted) => SolveOutcome {
            status: Status::Timeout,
            reduction: None,
            completion: None,
            log: None,
            stats,
        },
    }
}

/// Top-level children run on separate workers with independent state. The
/// lowest-indexed successful child wins, so without budget interruptions the
/// reduction equals the sequential one.
#[cfg(feature = "parallel")]
fn search_parallel(
    root: &SearchState,
    opts: &SearchOptions,
    budget: &Budget,
) -> (Result<Option<SearchState>, Interrupted>, SearchStats) {
    use rayon::prelude::*;
    use std::sync::Mutex;

    let candidates = next_candidates(root, opts.order);
    let totals = Mutex::new(SearchStats::default());
    let interrupted = AtomicBool::new(false);
    let run = || {
        candidates.par_iter().find_map_first(|&c| {
            let mut searcher = Searcher::new(opts, budget);
            let outcome = searcher.visit(root, c);
            totals.lock().unwrap().merge(&searcher.stats);
            match outcome {
                Ok(found) => found,
                Err(Interrupted) => {
                    interrupted.store(true, AtomicOrdering::Relaxed);
                    None
                }
            }
        })
    };
    let found = match rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
    {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    let stats = totals.into_inner().unwrap();
    let result = match found {
        Some(state) => Ok(Some(state)),
        None if interrupted.load(AtomicOrdering::Relaxed) => Err(Interrupted),
        None => Ok(None),
    };
    (result, stats)
}

#[cfg(not(feature = "parallel"))]
fn search_parallel(
    root: &SearchState,
    opts: &SearchOptions,
    budget: &Budget,
) -> (Result<Option<SearchState>, Interrupted>, SearchStats) {
    let mut searcher = Searcher::new(opts, budget);
    let result = searcher.descend(root);
    (result, searcher.stats)
}
