mod common;

use common::{all_matrices, random_matrix};
use fixedbitset::FixedBitSet;
use perphylo::phylogeny::PPTree;
use perphylo::search::{forbidden_in_completed, prune, SearchState};
use perphylo::{
    build_pp_tree, decide_pp, generate_instance, has_forbidden_submatrix, relabel_to_ppp, replay,
    verify_ppp, BinaryMatrix, CandidateOrder, ConflictGraph, ExtendedMatrix, GeneratorParams,
    MemoMode, SearchOptions, Status,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Naive triple loop over rows.
fn naive_forbidden(columns: &[FixedBitSet], n: usize) -> bool {
    for a in 0..columns.len() {
        for b in a + 1..columns.len() {
            let cell = |s: usize| (columns[a].contains(s), columns[b].contains(s));
            let has = |p| (0..n).any(|s| cell(s) == p);
            if has((true, true)) && has((true, false)) && has((false, true)) {
                return true;
            }
        }
    }
    false
}

#[test]
fn forbidden_test_matches_naive_scan() {
    for n in 1..=4 {
        for m in 1..=4 {
            for code in 0u64..1 << (n * m) {
                let mut cols = vec![FixedBitSet::with_capacity(n); m];
                for s in 0..n {
                    for j in 0..m {
                        if code >> (s * m + j) & 1 == 1 {
                            cols[j].insert(s);
                        }
                    }
                }
                let fast = has_forbidden_submatrix(&cols);
                assert_eq!(fast.is_some(), naive_forbidden(&cols, n));
                if let Some(w) = fast {
                    let (a, b) = w.columns;
                    let pats: Vec<_> = w
                        .rows
                        .iter()
                        .map(|&s| (cols[a].contains(s), cols[b].contains(s)))
                        .collect();
                    for p in [(true, true), (true, false), (false, true)] {
                        assert!(pats.contains(&p));
                    }
                }
            }
        }
    }
}

#[test]
fn conflict_graph_matches_four_gamete_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let m = random_matrix(&mut rng, 6, 5, 0.5);
        let g = ConflictGraph::build(&m);
        for u in 0..5 {
            for v in u + 1..5 {
                let mut seen = [false; 4];
                for s in 0..m.n_species() {
                    seen[usize::from(m.get(s, u)) * 2 + usize::from(m.get(s, v))] = true;
                }
                assert_eq!(g.has_edge(u, v), seen.iter().all(|&x| x));
            }
        }
    }
}

/// Every full permutation ends either e-empty or with a red Σ-path.
#[test]
fn any_order_ends_empty_or_with_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..500 {
        let (n, m) = (rng.gen_range(2..=8), rng.gen_range(2..=6));
        let matrix = random_matrix(&mut rng, n, m, 0.45);
        let me = ExtendedMatrix::build(&matrix);
        let mut order: Vec<usize> = (0..matrix.n_characters()).collect();
        order.shuffle(&mut rng);
        let r = replay(&me, &order).unwrap();
        assert!(
            r.graph.is_e_empty() || r.graph.find_sigma().is_some(),
            "trial {trial}: {order:?}\n{}",
            matrix.to_text()
        );
    }
}

#[test]
fn graph_stays_coherent_with_completion() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..300 {
        let matrix = random_matrix(&mut rng, 7, 5, 0.4);
        let me = ExtendedMatrix::build(&matrix);
        let mut order: Vec<usize> = (0..5).collect();
        order.shuffle(&mut rng);
        let mut state = SearchState::new(&me);
        for c in order {
            state = state.advance(c).unwrap();
            assert_eq!(state.graph().coherence_error(state.matrix()), None);
        }
    }
}

#[test]
fn sigma_test_agrees_with_forbidden_test_on_completed_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..2000 {
        let matrix = random_matrix(&mut rng, 6, 5, 0.4);
        let me = ExtendedMatrix::build(&matrix);
        let mut order: Vec<usize> = (0..5).collect();
        order.shuffle(&mut rng);
        let mut state = SearchState::new(&me);
        for c in order {
            state = state.advance(c).unwrap();
            assert_eq!(prune(&state), forbidden_in_completed(&state).is_some());
        }
    }
    let me = ExtendedMatrix::build(&random_matrix(&mut rng, 8, 6, 0.4));
    let opts = SearchOptions {
        cross_check: true,
        ..SearchOptions::default()
    };
    assert_eq!(decide_pp(&me, &opts).stats.cross_check_mismatches, 0);
}

#[test]
fn prune_safety_on_6x5() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let me = ExtendedMatrix::build(&random_matrix(&mut rng, 6, 5, 0.45));
        let on = decide_pp(&me, &SearchOptions::default());
        let off = decide_pp(
            &me,
            &SearchOptions {
                prune: false,
                ..SearchOptions::default()
            },
        );
        assert_eq!(on.status, off.status);
        assert!(on.stats.nodes <= off.stats.nodes);
    }
}

#[test]
fn heuristic_neutrality() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..300 {
        let me = ExtendedMatrix::build(&random_matrix(&mut rng, 6, 5, 0.45));
        let lex = decide_pp(&me, &SearchOptions::default());
        let cd = decide_pp(
            &me,
            &SearchOptions {
                order: CandidateOrder::ComponentDegree,
                ..SearchOptions::default()
            },
        );
        assert_eq!(lex.status, cd.status);
    }
}

#[test]
fn search_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let me = ExtendedMatrix::build(&random_matrix(&mut rng, 7, 5, 0.4));
        for order in [CandidateOrder::Lex, CandidateOrder::ComponentDegree] {
            let opts = SearchOptions {
                order,
                ..SearchOptions::default()
            };
            let a = decide_pp(&me, &opts);
            let b = decide_pp(&me, &opts);
            assert_eq!(a.status, b.status);
            assert_eq!(a.reduction, b.reduction);
            assert_eq!(a.stats.nodes, b.stats.nodes);
            assert_eq!(a.stats.prunes, b.stats.prunes);
        }
    }
}

#[test]
fn parallel_search_returns_the_sequential_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let me = ExtendedMatrix::build(&random_matrix(&mut rng, 7, 6, 0.4));
        let seq = decide_pp(&me, &SearchOptions::default());
        let par = decide_pp(
            &me,
            &SearchOptions {
                threads: 4,
                ..SearchOptions::default()
            },
        );
        assert_eq!(seq.status, par.status);
        assert_eq!(seq.reduction, par.reduction);
    }
}

#[test]
fn sat_reductions_replay_to_forbidden_free_completions() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..300 {
        let matrix = random_matrix(&mut rng, 7, 5, 0.4);
        let me = ExtendedMatrix::build(&matrix);
        let out = decide_pp(&me, &SearchOptions::default());
        if let Some(red) = out.reduction {
            let r = replay(&me, red.characters()).unwrap();
            assert!(r.is_successful());
            let c = r.completion().unwrap();
            assert!(c.forbidden_submatrix().is_none());
            assert_eq!(Some(c), out.completion);
        } else {
            assert_eq!(out.status, Status::Unsat);
        }
    }
}

#[test]
fn budget_yields_timeout_not_unsat() {
    let me = ExtendedMatrix::build(&common::fixture("unsat.matrix"));
    let out = decide_pp(
        &me,
        &SearchOptions {
            max_nodes: Some(3),
            ..SearchOptions::default()
        },
    );
    assert_eq!(out.status, Status::Timeout);
    assert!(out.stats.nodes <= 3);
}

/// The reached graph depends on the order of realization, not only on the
/// set of realized characters. The memo mode assumes otherwise and can miss
/// solutions.
#[test]
fn realization_depends_on_order() {
    let m = BinaryMatrix::from_rows(&[
        vec![1, 0, 0, 1, 0],
        vec![0, 1, 0, 0, 0],
        vec![0, 1, 0, 0, 0],
        vec![1, 0, 1, 1, 0],
        vec![0, 0, 0, 0, 0],
        vec![0, 1, 0, 1, 1],
    ])
    .unwrap();
    let me = ExtendedMatrix::build(&m);
    let bad = replay(&me, &[0, 2, 4, 1, 3]).unwrap();
    let good = replay(&me, &[1, 4, 3, 2, 0]).unwrap();
    assert!(good.is_successful());
    assert!(!bad.graph.is_e_empty());
    assert!(bad.graph.find_sigma().is_some());
}

#[test]
fn unsafe_memo_can_report_false_unsat() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut false_unsat = 0;
    let mut false_sat = 0;
    for _ in 0..3000 {
        let me = ExtendedMatrix::build(&random_matrix(&mut rng, 7, 6, 0.4));
        let exact = decide_pp(&me, &SearchOptions::default()).status;
        let memo = decide_pp(
            &me,
            &SearchOptions {
                memo: MemoMode::Unsafe,
                ..SearchOptions::default()
            },
        )
        .status;
        match (exact, memo) {
            (Status::Sat, Status::Unsat) => false_unsat += 1,
            (Status::Unsat, Status::Sat) => false_sat += 1,
            _ => {}
        }
    }
    assert_eq!(false_sat, 0);
    assert!(false_unsat > 0);
}

fn check_tree_invariants(t: &PPTree, c: &perphylo::Completion) {
    assert!(t.check(c).is_empty(), "{:?}", t.check(c));
    // Column counts never increase from a node to its children.
    let cols = c.columns();
    for node in t.nodes() {
        if let Some(p) = node.parent {
            for &l in &node.labels {
                for &pl in &t.node(p).labels {
                    assert!(cols[pl].count_ones(..) >= cols[l].count_ones(..));
                }
            }
        }
    }
}

#[test]
fn pp_trees_of_sat_completions() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut seen = 0;
    while seen < 1000 {
        let matrix = random_matrix(&mut rng, 6, 5, 0.4);
        let out = decide_pp(&ExtendedMatrix::build(&matrix), &SearchOptions::default());
        let Some(c) = out.completion else { continue };
        seen += 1;
        let t = build_pp_tree(&c).unwrap();
        check_tree_invariants(&t, &c);
        let ppp = relabel_to_ppp(&t);
        assert!(verify_ppp(&ppp, &matrix).is_ok());
    }
}

#[test]
fn exhaustive_small_trees_verify() {
    for n in 1..=3 {
        for m in 1..=3 {
            for matrix in all_matrices(n, m) {
                let sol = perphylo::solve(&matrix, &SearchOptions::default());
                let t = sol.tree.expect("all matrices up to 3x3 are SAT");
                assert!(verify_ppp(&t, &matrix).is_ok(), "{}", matrix.to_text());
            }
        }
    }
}

#[test]
fn generator_soundness() {
    for seed in 0..100 {
        let p = GeneratorParams {
            n_species: 12,
            n_characters: 6,
            loss_probability: 0.5,
            seed,
            allow_duplicates: true,
            ..GeneratorParams::default()
        };
        let (m, t) = generate_instance(&p).unwrap();
        assert!(verify_ppp(&t, &m).is_ok());
        let sol = perphylo::solve(&m, &SearchOptions::default());
        assert_eq!(sol.outcome.status, Status::Sat, "seed {seed}");
        assert!(verify_ppp(&sol.tree.unwrap(), &m).is_ok());
    }
}

#[test]
fn zero_loss_generator_gives_classic_pp() {
    for seed in 0..50 {
        let p = GeneratorParams {
            n_species: 8,
            n_characters: 6,
            loss_probability: 0.0,
            seed,
            allow_duplicates: true,
            ..GeneratorParams::default()
        };
        let (m, t) = generate_instance(&p).unwrap();
        assert_eq!(t.loss_edge_count(), 0);
        assert!(m.forbidden_submatrix().is_none());
    }
}
