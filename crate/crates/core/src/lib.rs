//! Persistent perfect phylogeny: decides whether a binary species×character
//! matrix can be explained by a tree in which every character is gained at
//! most once and lost at most once below its gain, and builds such a tree.
//!
//! The pipeline is
//!
//! ```text
//! BinaryMatrix -> ExtendedMatrix -> decide_pp -> Completion
//!              -> build_pp_tree -> relabel_to_ppp -> verify_ppp
//! ```
//!
//! ```
//! use perphylo::{solve, BinaryMatrix, SearchOptions, Status};
//!
//! let m = BinaryMatrix::from_rows(&[vec![0, 1], vec![1, 0], vec![1, 1]]).unwrap();
//! let sol = solve(&m, &SearchOptions::default());
//! assert_eq!(sol.outcome.status, Status::Sat);
//! assert_eq!(sol.tree.unwrap().loss_edge_count(), 1);
//! ```
//!
//! The `parallel` feature (on by default) runs oracle enumeration and the
//! top level of the search on rayon workers. Without it both run
//! sequentially with identical results.

pub mod error;
pub mod generate;
pub mod graph;
pub mod log;
pub mod matrix;
pub mod oracle;
pub mod phylogeny;
pub mod search;
pub mod serialize;

pub use error::{GenerateError, GraphError, MatrixError, OracleError, TraceError, TreeError};
pub use generate::{generate_instance, GeneratorParams};
pub use graph::{replay, EdgeColor, RedBlackGraph, Replay, SigmaWitness};
pub use log::{parse_trace, Event, RealizationLog, Trace, TraceEvent};
pub use matrix::{
    four_gametes, has_forbidden_submatrix, BinaryMatrix, Completion, ConflictGraph, ExtendedMatrix,
    ForbiddenWitness, LoadOptions,
};
pub use oracle::{count_conflicts, oracle_solve, oracle_solve_capped, oracle_solve_with};
pub use phylogeny::{
    build_pp_tree, relabel_to_ppp, verify_ppp, Change, EdgeLabel, PPPTree, PPTree, Property,
    VerificationReport,
};
pub use search::{
    decide_pp, CandidateOrder, MemoMode, Reduction, SearchOptions, SolveOutcome, Status,
};
pub use serialize::{parse_tree, serialize, TreeFormat};

/// Search outcome plus, when SAT, the persistent perfect phylogeny built
/// from the completion.
#[derive(Debug, Clone)]
pub struct Solution {
    pub outcome: SolveOutcome,
    pub tree: Option<PPPTree>,
}

pub fn solve(m: &BinaryMatrix, opts: &SearchOptions) -> Solution {
    let me = ExtendedMatrix::build(m);
    let outcome = decide_pp(&me, opts);
    let tree = outcome.completion.as_ref().map(|c| {
        let pp =
            build_pp_tree(c).expect("a successful reduction yields a forbidden-free completion");
        relabel_to_ppp(&pp)
    });
    Solution { outcome, tree }
}
