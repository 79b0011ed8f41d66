//! End-to-end acceptance checks.  Each test covers one release criterion and
//! prints a single pass/fail line; run with `--nocapture` to see them all.

use std::collections::BTreeSet;
use std::io::Write;
use std::process::Command;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use srp_core::instances::{c6, ex1, lat3, nosm, random_cycle_union, random_perfect_core};
use srp_core::irving::{find_stable_matching, phase_one};
use srp_core::model::{is_stable, phi};
use srp_core::oracle::{brute_optimum, enumerate_stable_matchings, Direction};
use srp_core::polytope::{
    build_hc, decompose_fractional, enumerate_semistable, halfintegral_points, membership,
    FractionalPoint, PolytopeVariant,
};
use srp_core::reduction::{
    bipartition, reduce_to_h, reduce_to_h_with_order, Reducibility,
};
use srp_core::solver::{optimize_exact, SolverError};
use srp_core::{approx, rat, ratio, Edge, EdgeWeights, Matching, PreferenceSystem, Rat};

fn criterion(n: usize, name: &str, f: impl FnOnce() + std::panic::UnwindSafe) {
    let outcome = std::panic::catch_unwind(f);
    match &outcome {
        Ok(()) => println!("criterion {n} ({name}): pass"),
        Err(_) => println!("criterion {n} ({name}): fail"),
    }
    if outcome.is_err() {
        panic!("criterion {n} ({name}) failed");
    }
}

fn edge(u: u32, v: u32) -> Edge {
    Edge::new(u, v)
}

fn edge_set(ps: &PreferenceSystem) -> BTreeSet<Edge> {
    ps.edges().into_iter().collect()
}

fn srp_exit(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_srp"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, content: &str) -> String {
    let p = dir.path().join(name);
    let mut f = std::fs::File::create(&p).unwrap();
    f.write_all(content.as_bytes()).unwrap();
    p.to_str().unwrap().to_owned()
}

fn instance_text(ps: &PreferenceSystem) -> String {
    let mut out = String::new();
    for a in ps.agents() {
        out.push_str(&a.to_string());
        out.push(':');
        for &v in ps.neighbors(a) {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
    }
    out
}

/// The shared randomized corpus: 500 instances already in perfect-core form
/// with at most 10 agents.
fn corpus() -> Vec<PreferenceSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut out = Vec::new();
    while out.len() < 500 {
        if let Some(ps) = random_perfect_core(&mut rng, 10) {
            out.push(ps);
        }
    }
    out
}

#[test]
fn criterion_1_worked_example() {
    criterion(1, "worked example", || {
        let ps = ex1();
        let removed: BTreeSet<Edge> = phase_one(&ps).removed.into_iter().collect();
        assert_eq!(
            removed,
            [edge(1, 2), edge(2, 3), edge(4, 5)].into_iter().collect()
        );
        let red = reduce_to_h(&ps).unwrap();
        let expected: BTreeSet<Edge> =
            [edge(1, 4), edge(2, 5), edge(3, 6)].into_iter().collect();
        assert_eq!(edge_set(&red.h), expected);
        assert_eq!(red.em.in_em, expected);
        let x = FractionalPoint::new(expected.iter().map(|&e| (e, Rat::one())));
        let y = FractionalPoint::new(
            [
                edge(1, 3),
                edge(3, 5),
                edge(1, 5),
                edge(2, 4),
                edge(4, 6),
                edge(2, 6),
            ]
            .map(|e| (e, ratio(1, 2))),
        );
        assert!(membership(&ps, PolytopeVariant::Fsm, &x).unwrap().is_member());
        assert!(membership(&ps, PolytopeVariant::Fsm, &y).unwrap().is_member());
        let stable = enumerate_stable_matchings(&ps).unwrap();
        assert_eq!(stable.len(), 1);
        let m = Matching::new(&ps, expected.iter().copied()).unwrap();
        assert!(stable.contains(&m));
    });
}

#[test]
fn criterion_2_strict_superset() {
    criterion(2, "strict superset", || {
        let ps = ex1();
        let gi = phase_one(&ps).surviving;
        // the phase-one graph keeps the odd triangle 1-3-5
        for e in [edge(1, 3), edge(3, 5), edge(1, 5)] {
            assert!(gi.contains_edge(e));
        }
        assert!(bipartition(&gi).is_none(), "phase-one graph must be odd");
        let red = reduce_to_h(&ps).unwrap();
        assert!(bipartition(&red.h).is_some(), "canonical subgraph must be bipartite");

        let dir = tempfile::tempdir().unwrap();
        let path = write_temp(&dir, "ex1.sm", &instance_text(&ps));
        let out = Command::new(env!("CARGO_BIN_EXE_srp"))
            .args(["reducible", &path])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        assert!(String::from_utf8(out.stdout).unwrap().starts_with("reducible"));
    });
}

#[test]
fn criterion_3_reduction_soundness() {
    criterion(3, "reduction soundness", || {
        let mut order_rng = ChaCha8Rng::seed_from_u64(0xD1CE);
        for ps in corpus() {
            let stable_g = enumerate_stable_matchings(&ps).unwrap();
            let gi = phase_one(&ps).surviving;
            let red = reduce_to_h(&ps).unwrap();
            assert_eq!(stable_g, enumerate_stable_matchings(&gi).unwrap());
            assert_eq!(stable_g, enumerate_stable_matchings(&red.h).unwrap());
            assert_eq!(red.em.in_em, stable_g.edge_union());

            // the subgraph does not depend on the deletion order
            for _ in 0..5 {
                let (h2, _) = reduce_to_h_with_order(&ps, &red.em, |elig| {
                    elig[order_rng.gen_range(0..elig.len())]
                });
                assert_eq!(h2, red.h);
            }

            let h = &red.h;
            let h_edges = edge_set(h);
            // stable edges survive, and nothing outside the phase-one graph does
            assert!(red.em.in_em.is_subset(&h_edges));
            assert!(h_edges.is_subset(&edge_set(&gi)));
            // the subgraph is a fixed point of phase one
            assert!(phase_one(h).removed.is_empty());
            for v in h.agents() {
                let f = h.first(v).unwrap();
                // best and last options pair up across the subgraph
                assert_eq!(h.last(f), Some(v));
                // everyone's best remaining option is a stable edge
                assert!(red.em.in_em.contains(&Edge::new(v, f)));
            }
            // non-stable survivors sit strictly inside both preference lists
            for &e in h_edges.difference(&red.em.in_em) {
                for u in e.endpoints() {
                    let v = e.other(u);
                    assert_ne!(h.first(u), Some(v));
                    assert_ne!(h.last(u), Some(v));
                }
            }
        }
    });
}

#[test]
fn criterion_4_polytope_suite() {
    criterion(4, "polytope suite", || {
        for ps in corpus() {
            let red = reduce_to_h(&ps).unwrap();
            let h_bipartite = bipartition(&red.h).is_some();

            // positive coordinates force tight stability constraints
            let fsm_points = halfintegral_points(&ps, PolytopeVariant::Fsm).unwrap();
            let stable = enumerate_stable_matchings(&ps).unwrap();
            let incidence: Vec<FractionalPoint> =
                stable.iter().map(FractionalPoint::from_matching).collect();
            for x in fsm_points.iter().chain(incidence.iter()) {
                for e in x.support() {
                    let total: Rat = phi(&ps, e)
                        .unwrap()
                        .iter()
                        .map(|&f| x.get(f))
                        .sum();
                    assert!(total.is_one(), "loose stability constraint at {e}");
                }
            }

            // the restricted polytope sees the same points on G and on H
            let bar_g = halfintegral_points(&ps, PolytopeVariant::FsmBar).unwrap();
            let bar_h = halfintegral_points(&red.h, PolytopeVariant::FsmBar).unwrap();
            assert_eq!(bar_g, bar_h);

            let partitions = enumerate_semistable(&ps, PolytopeVariant::FsmBar).unwrap();
            let all_hc_bipartite = partitions
                .iter()
                .all(|c| build_hc(&ps, c).unwrap().bipartite);
            assert_eq!(h_bipartite, all_hc_bipartite);

            if h_bipartite {
                for x in &bar_g {
                    if x.iter().all(|(_, v)| v.is_one()) {
                        continue;
                    }
                    let (m1, m2) = decompose_fractional(&ps, x).unwrap();
                    assert!(is_stable(&ps, &m1).is_stable());
                    assert!(is_stable(&ps, &m2).is_stable());
                    let x1 = FractionalPoint::from_matching(&m1);
                    let x2 = FractionalPoint::from_matching(&m2);
                    for e in ps.edges() {
                        let avg = (x1.get(e) + x2.get(e)) / rat(2);
                        assert_eq!(avg, x.get(e));
                    }
                }
            }
        }
    });
}

#[test]
fn criterion_5_exact_optimizer() {
    criterion(5, "exact optimizer", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
        let mut done = 0;
        while done < 500 {
            let Some(ps) = random_perfect_core(&mut rng, 10) else { continue };
            if !matches!(
                srp_core::reduction::is_bipartite_reducible(&ps).unwrap(),
                Reducibility::Reducible { .. }
            ) {
                continue;
            }
            let w = EdgeWeights::new(
                &ps,
                ps.edges()
                    .into_iter()
                    .map(|e| (e, rat(rng.gen_range(0..=100)))),
            )
            .unwrap();
            for dir in [Direction::Min, Direction::Max] {
                let (m, val) = optimize_exact(&ps, &w, dir).unwrap();
                let (_, expect) = brute_optimum(&ps, &w, dir).unwrap();
                assert_eq!(val, expect);
                assert_eq!(w.matching_weight(&m), val);
                assert!(is_stable(&ps, &m).is_stable());
            }
            done += 1;
        }

        let ps = c6();
        let w = EdgeWeights::new(
            &ps,
            ps.edges().into_iter().map(|e| {
                (e, if e == edge(1, 2) { rat(5) } else { rat(1) })
            }),
        )
        .unwrap();
        assert_eq!(optimize_exact(&ps, &w, Direction::Min).unwrap().1, rat(3));
        assert_eq!(optimize_exact(&ps, &w, Direction::Max).unwrap().1, rat(7));
    });
}

#[test]
fn criterion_6_approximation_guarantee() {
    criterion(6, "approximation guarantee", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xFEED);
        let fallbacks_before = approx::fallback_invocations();
        let mut done = 0;
        while done < 1000 {
            let ps = random_cycle_union(&mut rng, 12);
            if approx::check_cycle_form(&ps).is_err() {
                continue;
            }
            let w = EdgeWeights::new(
                &ps,
                ps.edges()
                    .into_iter()
                    .map(|e| (e, rat(rng.gen_range(0..=20)))),
            )
            .unwrap();
            let (m, val, bound) = approx::approximate_min_weight(&ps, &w).unwrap();
            assert!(is_stable(&ps, &m).is_stable());
            assert_eq!(w.matching_weight(&m), val);
            let (_, opt) = brute_optimum(&ps, &w, Direction::Min).unwrap();
            assert!(val <= opt.clone() * rat(2), "guarantee broken: {val} > 2*{opt}");
            assert!(val <= bound && bound <= opt * rat(2));

            // reweighting differs from the weight by a constant on stable
            // matchings
            let s = approx::check_cycle_form(&ps).unwrap();
            let tw = approx::tilde_weights(&s, &w);
            for sm in enumerate_stable_matchings(&ps).unwrap().iter() {
                assert_eq!(
                    w.matching_weight(sm),
                    tw.tilde_weight(sm) + tw.w_minus_total.clone()
                );
            }
            done += 1;
        }
        let fallbacks = approx::fallback_invocations() - fallbacks_before;
        println!("  exact fallback used on {fallbacks} of 1000 instances");

        // out-of-class instances are refused, via the library and the CLI
        assert!(matches!(
            approx::check_cycle_form(&lat3()),
            Err(approx::ApproxError::Violation { .. })
        ));
        let dir = tempfile::tempdir().unwrap();
        let inst = write_temp(&dir, "lat3.sm", &instance_text(&lat3()));
        let wfile = write_temp(&dir, "lat3.w", "1 4 1\n");
        assert_eq!(
            srp_exit(&["optimize", "--method", "approx", "--weights", &wfile, &inst]),
            2
        );
    });
}

#[test]
fn criterion_7_no_stable_matching() {
    criterion(7, "no stable matching", || {
        let ps = nosm();
        assert!(find_stable_matching(&ps).is_none());
        assert!(enumerate_stable_matchings(&ps).unwrap().is_empty());
        let dir = tempfile::tempdir().unwrap();
        let path = write_temp(&dir, "nosm.sm", &instance_text(&ps));
        assert_eq!(srp_exit(&["solve", &path]), 1);
    });
}

#[test]
fn criterion_8_scope() {
    criterion(8, "scope statement", || {
        // The exact optimizer only answers on bipartite-reducible instances;
        // outside that class it reports the violated precondition instead of
        // an optimum, so the general case stays as hard as it is.  No
        // external benchmark is reproduced anywhere in this suite.
        let mut rng = ChaCha8Rng::seed_from_u64(0xACE);
        for _ in 0..2000 {
            let Some(ps) = random_perfect_core(&mut rng, 10) else { continue };
            if matches!(
                srp_core::reduction::is_bipartite_reducible(&ps).unwrap(),
                Reducibility::NotReducible
            ) {
                let w = EdgeWeights::ones(&ps);
                assert_eq!(
                    optimize_exact(&ps, &w, Direction::Min).unwrap_err(),
                    SolverError::NotReducible
                );
                return;
            }
        }
        // every draw being reducible is itself fine; nothing to refuse
    });
}
