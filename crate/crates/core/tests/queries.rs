mod common;

use common::*;
use minnet_core::compile::{extended_minimal_network, Direction, PreferenceSpec};
use minnet_core::query::{
    extremum_lookup, prune_domains, select_solution, top_k_solutions, Exactness, Query,
};
use minnet_core::{Network, PartialAssignment, Tuple, Value};
use proptest::prelude::*;

fn matching(net: &Network, keep: impl Fn(&[Value]) -> bool) -> Vec<Vec<Value>> {
    brute_solutions(net).into_iter().filter(|s| keep(s)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn in_scope_queries_are_exact(seed in any::<u64>(), a in 0usize..4, b in 0usize..4, c in 0i64..3, count in 1usize..4) {
        prop_assume!(a != b);
        let net = random_network(&mut rng(seed), 4, 3, 3, 0.6, 0.7);
        let pref = PreferenceSpec::max("X3");
        let m = extended_minimal_network(&net, 2, 3, &pref).unwrap();
        let text = format!("X{} < X{} or X{} = {}", a + 1, b + 1, a + 1, c);
        let q = Query::parse(&text).unwrap();
        let hold = |s: &[Value]| s[a] < s[b] || s[a] == Value::Number(c);

        let mut want: Vec<Tuple> = matching(&net, hold).into_iter().map(Tuple::new).collect();
        want.sort_by(|x, y| pref.compare(&net, x, y).unwrap());

        let ans = select_solution(&m, &q).unwrap();
        prop_assert_eq!(ans.exactness, Exactness::Exact);
        prop_assert_eq!(ans.satisfiable, !want.is_empty());
        if let Some(w) = &ans.witness {
            prop_assert!(net.is_solution(w) && hold(w.values()));
        }

        let top = top_k_solutions(&m, &q, count).unwrap();
        prop_assert_eq!(top.exactness, Exactness::Exact);
        want.truncate(count);
        prop_assert_eq!(top.top, want);
    }

    #[test]
    fn wider_queries_fall_back_to_search(seed in any::<u64>()) {
        let net = random_network(&mut rng(seed), 4, 3, 2, 0.6, 0.7);
        let m = extended_minimal_network(&net, 2, 1, &PreferenceSpec::none()).unwrap();
        let q = Query::parse("X1 = X2 and X3 != X4").unwrap();
        let want = matching(&net, |s| s[0] == s[1] && s[2] != s[3]);
        let ans = select_solution(&m, &q).unwrap();
        prop_assert_eq!(ans.exactness, Exactness::BestEffort);
        prop_assert_eq!(ans.witness.map(|t| t.values().to_vec()), want.first().cloned());
    }

    #[test]
    fn extremum_matches_brute_force(seed in any::<u64>(), c in 0i64..3) {
        let net = random_network(&mut rng(seed), 4, 3, 3, 0.6, 0.7);
        let m = extended_minimal_network(&net, 2, 1, &PreferenceSpec::none()).unwrap();
        let cond = Query::parse(&format!("X4 = {c}")).unwrap();
        let values: Vec<Value> = matching(&net, |s| s[3] == Value::Number(c)).into_iter().map(|s| s[1].clone()).collect();
        let hi = extremum_lookup(&m, "X2", Direction::Max, &cond).unwrap();
        let lo = extremum_lookup(&m, "X2", Direction::Min, &cond).unwrap();
        prop_assert_eq!(hi, values.iter().max().cloned());
        prop_assert_eq!(lo, values.iter().min().cloned());
    }

    #[test]
    fn single_pin_pruning_is_exact(seed in any::<u64>(), var in 0usize..4, val in 0i64..3) {
        let net = random_network(&mut rng(seed), 4, 3, 3, 0.6, 0.7);
        let m = extended_minimal_network(&net, 2, 1, &PreferenceSpec::none()).unwrap();
        let id = net.variables()[var].clone();
        let pins: PartialAssignment = [(id, Value::Number(val))].into_iter().collect();
        let p = prune_domains(&m, &pins).unwrap();
        prop_assert_eq!(p.exactness, Exactness::Exact);
        let sols = matching(&net, |s| s[var] == Value::Number(val));
        for (i, v) in net.variables().iter().enumerate() {
            if i == var {
                continue;
            }
            let mut want: Vec<Value> = sols.iter().map(|s| s[i].clone()).collect();
            want.sort();
            want.dedup();
            prop_assert_eq!(&p.feasible[v], &want, "variable {}", v);
        }
    }
}

#[test]
fn pruning_with_many_pins_is_a_superset() {
    let net = fig1();
    let m = extended_minimal_network(&net, 2, 1, &PreferenceSpec::none()).unwrap();
    let vars = net.variables();
    let pins: PartialAssignment =
        [(vars[0].clone(), Value::Number(1)), (vars[3].clone(), Value::Number(1))].into_iter().collect();
    let p = prune_domains(&m, &pins).unwrap();
    assert_eq!(p.exactness, Exactness::BestEffort);
    for s in fig1_solutions().into_iter().filter(|s| s[0] == 1 && s[3] == 1) {
        assert!(p.feasible[&vars[1]].contains(&Value::Number(s[1])));
        assert!(p.feasible[&vars[2]].contains(&Value::Number(s[2])));
    }
}
