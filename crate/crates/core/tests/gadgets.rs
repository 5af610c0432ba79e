mod common;

use common::*;
use minnet_core::cnf::Cnf;
use minnet_core::decomp::{is_k_decomposable, validate_k_counterexample, DecompOutcome};
use minnet_core::encode::NetworkSat;
use minnet_core::gadgets::{
    astar_pipeline, sat_to_network, standardize_domains, symmetry_transform, threecol_network, threecol_to_constraint,
    trivalued_construction, AStarOptions, BacktrackingFinder, Graph,
};
use minnet_core::sat::{solve_cnf, SatOutcome};
use minnet_core::search::SearchStatus;
use minnet_core::{find_solution, solve_all, FindOutcome, PartialAssignment, Value};
use proptest::prelude::*;
use rand::RngExt;

fn colorings(g: &Graph) -> usize {
    let n = g.vertex_count();
    (0..3usize.pow(n as u32))
        .filter(|code| {
            let color = |v: usize| code / 3usize.pow(v as u32 - 1) % 3;
            g.edges().all(|(u, v)| color(u) != color(v))
        })
        .count()
}

fn random_graph(seed: u64, n: usize, p: f64) -> Graph {
    let mut r = rng(seed);
    let edges: Vec<(usize, usize)> = (1..=n)
        .flat_map(|u| (u + 1..=n).map(move |v| (u, v)))
        .filter(|_| r.random_bool(p))
        .collect();
    Graph::new(n, edges).unwrap()
}

fn solvable(net: &minnet_core::Network) -> bool {
    matches!(find_solution(net, &PartialAssignment::new(), u64::MAX).unwrap(), FindOutcome::Found(_))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdcl_agrees_with_truth_tables(seed in any::<u64>(), atoms in 3usize..13, clauses in 1usize..60) {
        let cnf = random_cnf(&mut rng(seed), atoms, clauses, 1, 3);
        match solve_cnf(&cnf, u64::MAX) {
            SatOutcome::Sat(model) => prop_assert!(cnf.evaluate(&model)),
            SatOutcome::Unsat => prop_assert!(!brute_sat(&cnf)),
            SatOutcome::BudgetExhausted => prop_assert!(false, "unbounded solve ran out of budget"),
        }
    }

    #[test]
    fn clause_encoding_extends_exactly_the_extendable_pins(seed in any::<u64>(), arity in 2usize..4) {
        let net = random_network(&mut rng(seed), 4, 3, arity, 0.6, 0.7);
        let sols = brute_solutions(&net);
        let mut sat = NetworkSat::new(&net);
        for x in 0..4 {
            for a in 0..3u32 {
                let want = sols.iter().any(|s| s[x] == Value::Number(a as i64));
                let (got, status) = sat.extend(&[(x, a)], u64::MAX);
                prop_assert_eq!(got.is_some(), want);
                prop_assert_ne!(status, SearchStatus::BudgetExhausted);
                if let Some(g) = got {
                    prop_assert_eq!(g[x], a);
                    let values: Vec<Value> = g.iter().map(|&i| Value::Number(i as i64)).collect();
                    prop_assert!(sols.contains(&values));
                }
            }
        }
    }

    #[test]
    fn symmetry_transform_keeps_satisfiability(seed in any::<u64>(), atoms in 3usize..5, clauses in 1usize..8) {
        let cnf = random_cnf(&mut rng(seed), atoms, clauses, 1, 3);
        let (star, map) = symmetry_transform(&cnf, 1).unwrap();
        prop_assert!(map.0.iter().all(|(_, fresh)| fresh.len() == 3));
        prop_assert!(star.clauses().iter().all(|c| c.len() % 2 == 0));
        prop_assert_eq!(brute_sat(&star), brute_sat(&cnf));
    }

    #[test]
    fn standardized_network_has_the_same_solutions(seed in any::<u64>()) {
        let net = random_network(&mut rng(seed), 4, 4, 2, 0.6, 0.6);
        let (std_net, maps) = standardize_domains(&net).unwrap();
        let before = solve_all(&net).unwrap();
        let after = solve_all(&std_net).unwrap();
        prop_assert_eq!(before.len(), after.len());
        for t in after.tuples() {
            let back = maps.to_original(t);
            prop_assert!(before.contains(&back));
            prop_assert_eq!(maps.to_standard(&back), Some(t.clone()));
        }
    }

    #[test]
    fn coloring_network_counts_colorings(seed in any::<u64>(), n in 3usize..7) {
        let g = random_graph(seed, n, 0.5);
        let net = threecol_network(&g, 2).unwrap();
        prop_assert_eq!(solve_all(&net).unwrap().len(), colorings(&g));
    }

    #[test]
    fn coloring_relation_is_decomposable_iff_uncolorable(seed in any::<u64>()) {
        let g = random_graph(seed, 4, 0.8);
        let rho = threecol_to_constraint(&g, 2).unwrap();
        let v = is_k_decomposable(&rho, 2, u64::MAX).unwrap();
        prop_assert_eq!(v.outcome == DecompOutcome::Decomposable, colorings(&g) == 0);
    }
}

#[test]
fn clause_network_transfers_satisfiability() {
    let mut r = rng(41);
    let mut sat = 0;
    for i in 0..30 {
        let cnf = if i % 6 == 5 { blocked_cnf(&mut r, 5) } else { random_cnf(&mut r, 5, 8, 2, 3) };
        let net = sat_to_network(&cnf, 2).unwrap();
        assert_eq!(net.len(), cnf.len());
        let want = brute_sat(&cnf);
        assert_eq!(solvable(&net), want, "formula {i}");
        sat += want as usize;
    }
    assert!(sat > 0 && sat < 30);
}

#[test]
fn pipeline_answers_agree_with_truth_tables() {
    let mut r = rng(7);
    let opts = AStarOptions { symmetry_k: 1, arity: 2, step_budget: u64::MAX };
    for i in 0..12 {
        let cnf = random_cnf(&mut r, 4, 6, 1, 2);
        let report = astar_pipeline(&cnf, &BacktrackingFinder, &opts).unwrap();
        assert_eq!(report.satisfiable, brute_sat(&cnf), "formula {i}");
        if let Some(assignment) = report.assignment {
            let value = |a: &str| assignment.iter().find(|(x, _)| x == a).unwrap().1;
            assert!(cnf.clauses().iter().all(|c| c.satisfied_by(value)));
        }
    }
}

#[test]
fn small_colorings() {
    assert_eq!(solve_all(&threecol_network(&Graph::complete(3), 2).unwrap()).unwrap().len(), 6);
    assert_eq!(solve_all(&threecol_network(&Graph::cycle(5), 2).unwrap()).unwrap().len(), 30);
    assert!(!solvable(&threecol_network(&Graph::complete(4), 3).unwrap()));
    assert!(solvable(&threecol_network(&Graph::complete(4).without_edge(1, 2), 3).unwrap()));
}

#[test]
fn trivalued_triangle_has_a_valid_counterexample() {
    let rho = trivalued_construction(&Graph::complete(3)).unwrap();
    assert!(rho.distinct_values().len() <= 3);
    let v = is_k_decomposable(&rho, 2, u64::MAX).unwrap();
    assert_eq!(v.outcome, DecompOutcome::Counterexample);
    assert!(validate_k_counterexample(&rho, 2, v.t0.as_ref().unwrap()));
}

#[test]
fn empty_formula_is_rejected_by_the_pipeline() {
    let opts = AStarOptions { symmetry_k: 1, arity: 2, step_budget: 1000 };
    assert!(astar_pipeline(&Cnf::new(Vec::new()), &BacktrackingFinder, &opts).is_err());
}
