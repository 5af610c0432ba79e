mod common;

use std::collections::BTreeSet;

use common::*;
use minnet_core::decomp::{
    bivalued_2decomposable, frontier_route, is_k_decomposable, join_dependency_holds,
    validate_k_counterexample, DecompOutcome,
};
use minnet_core::{complete_schema, natural_join, project, relation_equal, Relation, Scope, Tuple, Value};
use proptest::prelude::*;

fn sub_scope(rel: &Relation, cols: &[usize]) -> Scope {
    Scope::new(cols.iter().map(|&c| rel.scope().vars()[c].clone()).collect()).unwrap()
}

/// Nested-loop join over the full scope X1..Xn of two relations covering it.
fn nested_join(a: &Relation, b: &Relation, n: usize) -> BTreeSet<Vec<Value>> {
    let mut out = BTreeSet::new();
    for s in a.tuples() {
        for t in b.tuples() {
            let mut row: Vec<Option<Value>> = vec![None; n];
            let mut ok = true;
            for (rel, tup) in [(a, s), (b, t)] {
                for (v, x) in rel.scope().vars().iter().zip(tup.values()) {
                    let slot = &mut row[v.rank() as usize];
                    match slot {
                        Some(y) if y != x => ok = false,
                        _ => *slot = Some(x.clone()),
                    }
                }
            }
            if ok {
                out.insert(row.into_iter().map(Option::unwrap).collect());
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn join_matches_nested_loops_and_ignores_order(seed in any::<u64>(), size in 1usize..20) {
        let mut r = rng(seed);
        let rho = random_relation(&mut r, 4, 3, 40);
        let other = random_relation(&mut r, 4, 3, size);
        let a = project(&rho, &sub_scope(&rho, &[0, 1, 2])).unwrap();
        let b = project(&other, &sub_scope(&other, &[1, 3])).unwrap();
        let c = project(&other, &sub_scope(&other, &[2, 3])).unwrap();
        let ab = natural_join(&[a.clone(), b.clone()]).unwrap();
        let got: BTreeSet<Vec<Value>> = ab.tuples().iter().map(|t| t.values().to_vec()).collect();
        prop_assert_eq!(got, nested_join(&a, &b, 4));
        let abc = natural_join(&[a.clone(), b.clone(), c.clone()]).unwrap();
        let cba = natural_join(&[c, b, a]).unwrap();
        prop_assert!(relation_equal(&abc, &cba));
    }

    #[test]
    fn join_of_projections_contains_the_relation(seed in any::<u64>(), size in 1usize..30) {
        let rho = random_relation(&mut rng(seed), 3, 3, size);
        let parts: Vec<Relation> = [[0, 1], [1, 2], [0, 2]]
            .iter()
            .map(|c| project(&rho, &sub_scope(&rho, c)).unwrap())
            .collect();
        let j = natural_join(&parts).unwrap();
        prop_assert!(rho.is_subset_of(&j));
        for (p, c) in parts.iter().zip([[0, 1], [1, 2], [0, 2]]) {
            prop_assert!(relation_equal(&project(&j, &sub_scope(&rho, &c)).unwrap(), p));
        }
    }

    #[test]
    fn generic_decision_agrees_with_materialized_join(seed in any::<u64>(), arity in 2usize..5, dom in 2i64..4, size in 1usize..24, k in 1usize..4) {
        let rho = random_relation(&mut rng(seed), arity, dom, size);
        let want = brute_k_decomposable(&rho, k);
        let v = is_k_decomposable(&rho, k, u64::MAX).unwrap();
        prop_assert_eq!(v.outcome == DecompOutcome::Decomposable, want);
        if let Some(t0) = &v.t0 {
            prop_assert!(!rho.contains(t0));
            prop_assert!(validate_k_counterexample(&rho, k, t0));
        }
        let fast = frontier_route(&rho, k, u64::MAX).unwrap();
        prop_assert_eq!(fast.outcome, v.outcome);
        let schema = complete_schema(rho.scope().vars(), k).unwrap();
        prop_assert_eq!(join_dependency_holds(&rho, &schema, u64::MAX).unwrap().outcome, v.outcome);
    }

    #[test]
    fn two_valued_route_agrees(seed in any::<u64>(), arity in 2usize..6, size in 1usize..20) {
        let rho = random_relation(&mut rng(seed), arity, 2, size);
        prop_assume!(rho.distinct_values().len() == 2);
        let v = bivalued_2decomposable(&rho).unwrap();
        prop_assert_eq!(v.outcome == DecompOutcome::Decomposable, brute_k_decomposable(&rho, 2));
        if let Some(t0) = &v.t0 {
            prop_assert!(validate_k_counterexample(&rho, 2, t0));
        }
    }
}

#[test]
fn parity_needs_all_three_columns() {
    let rows = [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]].map(|r| Tuple::numbers(&r));
    let rho = Relation::new(scope_of(3), rows).unwrap();
    let v = is_k_decomposable(&rho, 2, u64::MAX).unwrap();
    assert_eq!(v.outcome, DecompOutcome::Counterexample);
    assert_eq!(v.t0, Some(Tuple::numbers(&[0, 0, 1])));
    assert_eq!(is_k_decomposable(&rho, 3, u64::MAX).unwrap().outcome, DecompOutcome::Decomposable);
}
