//! Fixtures, brute-force oracles and random instance generators shared by the
//! integration tests. The oracles deliberately avoid the library's search,
//! join and SAT code.
#![allow(dead_code)]

use std::collections::HashSet;
use std::path::PathBuf;

use minnet_core::cnf::{Clause, Cnf, Literal};
use minnet_core::io;
use minnet_core::{Network, Relation, Scope, Tuple, Value, VariableId};
use rand::seq::SliceRandom;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn fig1() -> Network {
    io::network_from_json(&fixture("fig1a.json")).unwrap()
}

pub fn fig1_solutions() -> Vec<Vec<i64>> {
    vec![vec![1, 1, 2, 1], vec![1, 2, 2, 1], vec![2, 1, 1, 2], vec![3, 4, 1, 2]]
}

/// Satisfiability by trying every assignment.
pub fn brute_sat(cnf: &Cnf) -> bool {
    brute_models(cnf).next().is_some()
}

/// Every satisfying assignment, as atom-name/value pairs in atom order.
pub fn brute_models(cnf: &Cnf) -> impl Iterator<Item = Vec<bool>> + '_ {
    let atoms: Vec<String> = cnf.atoms().map(str::to_string).collect();
    let n = atoms.len();
    assert!(n <= 20, "brute force limited to 20 atoms");
    (0u64..1 << n).filter_map(move |bits| {
        let value = |a: &str| {
            let i = atoms.iter().position(|x| x == a).unwrap();
            bits >> i & 1 == 1
        };
        let ok = cnf
            .clauses()
            .iter()
            .all(|c| c.literals().iter().any(|l| value(l.atom()) == l.is_positive()));
        ok.then(|| (0..n).map(|i| bits >> i & 1 == 1).collect())
    })
}

/// Every full assignment over the domains that satisfies every constraint.
pub fn brute_solutions(net: &Network) -> Vec<Vec<Value>> {
    let doms = net.domains();
    let mut out = Vec::new();
    if doms.is_empty() || doms.iter().any(Vec::is_empty) {
        return out;
    }
    let mut idx = vec![0usize; doms.len()];
    loop {
        let t: Vec<Value> = idx.iter().zip(doms).map(|(&i, d)| d[i].clone()).collect();
        let ok = net.constraints().all(|rel| {
            let proj: Vec<Value> = rel.scope().ranks().map(|r| t[r as usize].clone()).collect();
            rel.tuples().iter().any(|x| x.values() == proj.as_slice())
        });
        if ok {
            out.push(t);
        }
        let mut i = doms.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < doms[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

fn subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    (1u32..1 << n)
        .filter(|m| (m.count_ones() as usize) <= max)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Materializes the join of the projections of `rho` onto every column set
/// of size at most k and compares it with `rho`.
pub fn brute_k_decomposable(rho: &Relation, k: usize) -> bool {
    let a = rho.arity();
    let rows: Vec<&[Value]> = rho.tuples().iter().map(|t| t.values()).collect();
    let sets = subsets(a, k);
    let projections: Vec<HashSet<Vec<Value>>> = sets
        .iter()
        .map(|s| rows.iter().map(|r| s.iter().map(|&c| r[c].clone()).collect()).collect())
        .collect();
    let cols: Vec<Vec<Value>> = (0..a)
        .map(|c| {
            let mut v: Vec<Value> = rows.iter().map(|r| r[c].clone()).collect();
            v.sort();
            v.dedup();
            v
        })
        .collect();
    let member: HashSet<Vec<Value>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut join_size = 0usize;
    let mut idx = vec![0usize; a];
    if cols.iter().any(Vec::is_empty) {
        return true;
    }
    loop {
        let t: Vec<Value> = idx.iter().zip(&cols).map(|(&i, c)| c[i].clone()).collect();
        let in_join = sets
            .iter()
            .zip(&projections)
            .all(|(s, p)| p.contains(&s.iter().map(|&c| t[c].clone()).collect::<Vec<_>>()));
        if in_join {
            if !member.contains(&t) {
                return false;
            }
            join_size += 1;
        }
        let mut i = a;
        loop {
            if i == 0 {
                return join_size == member.len();
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < cols[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

pub fn random_cnf(rng: &mut ChaCha8Rng, atoms: usize, clauses: usize, min_len: usize, max_len: usize) -> Cnf {
    let names: Vec<String> = (1..=atoms).map(|i| format!("v{i}")).collect();
    let out = (0..clauses)
        .map(|_| {
            let len = rng.random_range(min_len..=max_len.min(atoms));
            let mut picked: Vec<usize> = Vec::new();
            while picked.len() < len {
                let a = rng.random_range(0..atoms);
                if !picked.contains(&a) {
                    picked.push(a);
                }
            }
            Clause::new(picked.into_iter().map(|a| Literal::new(&names[a], rng.random_bool(0.5)).unwrap()))
        })
        .collect();
    Cnf::new(out)
}

/// All eight sign patterns over three distinct random atoms among v1..vn,
/// in random order. Unsatisfiable for every n >= 3.
pub fn blocked_cnf(rng: &mut ChaCha8Rng, atoms: usize) -> Cnf {
    let mut picked: Vec<usize> = Vec::new();
    while picked.len() < 3 {
        let a = rng.random_range(0..atoms);
        if !picked.contains(&a) {
            picked.push(a);
        }
    }
    let mut clauses: Vec<Clause> = (0..8u32)
        .map(|signs| {
            Clause::new(picked.iter().enumerate().map(|(i, &a)| {
                Literal::new(&format!("v{}", a + 1), signs >> i & 1 == 1).unwrap()
            }))
        })
        .collect();
    clauses.shuffle(rng);
    Cnf::new(clauses)
}

/// Random network over X1..Xn with domains 0..dom and a random relation on
/// each scope of size 1..=arity, kept with probability `density`.
pub fn random_network(rng: &mut ChaCha8Rng, n: usize, dom: i64, arity: usize, density: f64, fill: f64) -> Network {
    let mut net = Network::new(
        (1..=n).map(|i| (format!("X{i}"), (0..dom).map(Value::Number).collect::<Vec<_>>())),
    )
    .unwrap();
    let vars = net.variables().to_vec();
    for s in subsets(n, arity) {
        if !rng.random_bool(density) {
            continue;
        }
        let scope = Scope::new(s.iter().map(|&i| vars[i].clone()).collect()).unwrap();
        let mut tuples = Vec::new();
        let mut idx = vec![0i64; s.len()];
        loop {
            if rng.random_bool(fill) {
                tuples.push(Tuple::numbers(&idx));
            }
            let mut i = s.len();
            let done = loop {
                if i == 0 {
                    break true;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < dom {
                    break false;
                }
                idx[i] = 0;
            };
            if done {
                break;
            }
        }
        net.add_constraint(Relation::new(scope, tuples).unwrap()).unwrap();
    }
    net
}

pub fn scope_of(arity: usize) -> Scope {
    Scope::new((0..arity).map(|i| VariableId::new(&format!("X{}", i + 1), i as u32)).collect()).unwrap()
}

pub fn random_relation(rng: &mut ChaCha8Rng, arity: usize, dom: i64, size: usize) -> Relation {
    let tuples: Vec<Tuple> = (0..size)
        .map(|_| Tuple::numbers(&(0..arity).map(|_| rng.random_range(0..dom)).collect::<Vec<_>>()))
        .collect();
    Relation::new(scope_of(arity), tuples).unwrap()
}

pub fn numbers(t: &Tuple) -> Vec<i64> {
    t.values().iter().map(|v| v.as_number().unwrap()).collect()
}
