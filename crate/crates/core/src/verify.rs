//! Minimality and supersymmetry verification.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::cnf::Cnf;
use crate::encode::NetworkSat;
use crate::error::{Error, Result};
use crate::network::{combinations, complete_network, Network};
use crate::relation::Relation;
use crate::sat::{lit, SatOutcome, Solver};
use crate::search::SearchStatus;
use crate::value::{Scope, Tuple, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimalityOutcome {
    Minimal,
    NotMinimal,
    InconclusiveBudget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalityWitness {
    pub scope: Scope,
    pub tuple: Tuple,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalityVerdict {
    pub outcome: MinimalityOutcome,
    pub witness: Option<MinimalityWitness>,
    pub budget_hit: bool,
}

impl MinimalityVerdict {
    fn decided(witness: Option<MinimalityWitness>, budget_hit: bool) -> Self {
        let outcome = match (&witness, budget_hit) {
            (Some(_), _) => MinimalityOutcome::NotMinimal,
            (None, true) => MinimalityOutcome::InconclusiveBudget,
            (None, false) => MinimalityOutcome::Minimal,
        };
        MinimalityVerdict {
            outcome,
            witness,
            budget_hit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemaMode {
    AsGiven,
    CompleteK(usize),
}

/// Position of a tuple of value indices within its relation. Small value
/// spaces use a dense table, larger ones a hash map.
enum TupleIndex {
    Dense { strides: Vec<usize>, slots: Vec<u32> },
    Sparse(HashMap<Box<[u32]>, u32>),
}

const DENSE_LIMIT: usize = 1 << 16;

impl TupleIndex {
    fn new(rows: &[Box<[u32]>], widths: impl Iterator<Item = usize>) -> Self {
        let widths: Vec<usize> = widths.collect();
        let space = widths
            .iter()
            .try_fold(1usize, |acc, &w| acc.checked_mul(w))
            .filter(|&n| n <= DENSE_LIMIT);
        match space {
            Some(size) => {
                let mut strides = vec![1usize; widths.len()];
                for i in (0..widths.len().saturating_sub(1)).rev() {
                    strides[i] = strides[i + 1] * widths[i + 1];
                }
                let mut slots = vec![u32::MAX; size];
                for (pos, r) in rows.iter().enumerate() {
                    let at: usize = r.iter().zip(&strides).map(|(&a, &s)| a as usize * s).sum();
                    slots[at] = pos as u32;
                }
                TupleIndex::Dense { strides, slots }
            }
            None => TupleIndex::Sparse(
                rows.iter()
                    .enumerate()
                    .map(|(pos, r)| (r.clone(), pos as u32))
                    .collect(),
            ),
        }
    }

    fn find(&self, values: impl Iterator<Item = u32>) -> Option<usize> {
        let pos = match self {
            TupleIndex::Dense { strides, slots } => {
                let at: usize = values.zip(strides).map(|(a, &s)| a as usize * s).sum();
                slots[at]
            }
            TupleIndex::Sparse(map) => {
                let key: Box<[u32]> = values.collect();
                *map.get(&key)?
            }
        };
        (pos != u32::MAX).then_some(pos as usize)
    }
}

/// Decides whether every constraint tuple extends to a solution.
///
/// Tuples are tried in canonical order (scopes by arity, then rank). Each
/// solution found marks every tuple it projects onto, so only tuples not yet
/// covered trigger an extension check, which runs on a clause encoding of
/// the network (see [`crate::encode`]). The converse inclusion, that every
/// projection of a solution lies in its constraint, holds by definition of a
/// solution. The budget bounds solver decisions plus conflicts per check.
pub fn is_minimal(net: &Network, mode: SchemaMode, budget: u64) -> Result<MinimalityVerdict> {
    let net = match mode {
        SchemaMode::AsGiven => net.clone(),
        SchemaMode::CompleteK(k) => complete_network(net, k)?,
    };
    let rels: Vec<&Relation> = net.constraints().collect();
    let cols: Vec<Vec<usize>> = rels
        .iter()
        .map(|r| r.scope().ranks().map(|x| x as usize).collect())
        .collect();
    // Tuples as value indices, and the position of each in its relation.
    let rows: Vec<Vec<Box<[u32]>>> = rels
        .iter()
        .zip(&cols)
        .map(|(r, c)| {
            r.tuples()
                .iter()
                .map(|t| {
                    t.values()
                        .iter()
                        .zip(c)
                        .map(|(v, &x)| {
                            net.domains()[x]
                                .binary_search(v)
                                .expect("constraint values lie in domains") as u32
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let position: Vec<TupleIndex> = rows
        .iter()
        .zip(&cols)
        .map(|(rs, c)| TupleIndex::new(rs, c.iter().map(|&x| net.domains()[x].len())))
        .collect();
    let mut covered: Vec<FixedBitSet> = rels
        .iter()
        .map(|r| FixedBitSet::with_capacity(r.len()))
        .collect();
    let mut budget_hit = false;
    let mut solver = NetworkSat::new(&net);

    for (ci, rel) in rels.iter().enumerate() {
        for (ti, row) in rows[ci].iter().enumerate() {
            if covered[ci].contains(ti) {
                continue;
            }
            let pins: Vec<(usize, u32)> = cols[ci].iter().copied().zip(row.iter().copied()).collect();
            let (found, status) = solver.extend(&pins, budget);
            match found {
                Some(sol) => {
                    for (cj, c) in cols.iter().enumerate() {
                        if let Some(pos) = position[cj].find(c.iter().map(|&x| sol[x])) {
                            covered[cj].insert(pos);
                        }
                    }
                }
                None if status == SearchStatus::BudgetExhausted => budget_hit = true,
                None => {
                    let witness = MinimalityWitness {
                        scope: rel.scope().clone(),
                        tuple: rel.tuples()[ti].clone(),
                    };
                    return Ok(MinimalityVerdict::decided(Some(witness), budget_hit));
                }
            }
        }
    }
    Ok(MinimalityVerdict::decided(None, budget_hit))
}

/// The n-partite compatibility graph of a binary network: one part per
/// variable, one vertex per remaining domain value, and an edge between two
/// vertices of different parts when their constraint allows the pair.
pub struct NPartiteGraph {
    parts: Vec<Vec<Value>>,
    /// `adj[i][a][j]`: vertices of part `j` adjacent to vertex `a` of part `i`.
    adj: Vec<Vec<Vec<FixedBitSet>>>,
}

impl NPartiteGraph {
    /// Builds G_N. Unary constraints are folded into the parts. Requires a
    /// constraint on every pair of variables and no constraint above arity 2.
    pub fn from_network(net: &Network) -> Result<Self> {
        if net.arity() > 2 {
            return Err(Error::Precondition(format!(
                "network has a constraint of arity {}",
                net.arity()
            )));
        }
        let n = net.len();
        let vars = net.variables();
        let parts: Vec<Vec<Value>> = vars
            .iter()
            .map(|v| {
                let dom = net.domain(v).to_vec();
                match Scope::new(vec![v.clone()])
                    .ok()
                    .and_then(|s| net.constraint(&s).cloned())
                {
                    Some(rel) => dom
                        .into_iter()
                        .filter(|x| rel.contains_values(std::slice::from_ref(x)))
                        .collect(),
                    None => dom,
                }
            })
            .collect();
        let mut adj: Vec<Vec<Vec<FixedBitSet>>> = parts
            .iter()
            .map(|p| {
                (0..p.len())
                    .map(|_| {
                        parts
                            .iter()
                            .map(|q| FixedBitSet::with_capacity(q.len()))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                let scope = Scope::new(vec![vars[i].clone(), vars[j].clone()])?;
                let rel = net.constraint(&scope).ok_or_else(|| {
                    Error::Precondition(format!(
                        "network is not complete: no constraint on {scope}"
                    ))
                })?;
                for t in rel.tuples() {
                    let a = parts[i].binary_search(&t[0]);
                    let b = parts[j].binary_search(&t[1]);
                    if let (Ok(a), Ok(b)) = (a, b) {
                        adj[i][a][j].insert(b);
                        adj[j][b][i].insert(a);
                    }
                }
            }
        }
        Ok(NPartiteGraph { parts, adj })
    }

    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub fn vertex(&self, part: usize, value: &Value) -> Option<usize> {
        self.parts[part].binary_search(value).ok()
    }

    pub fn has_edge(&self, (i, a): (usize, usize), (j, b): (usize, usize)) -> bool {
        i != j && self.adj[i][a][j].contains(b)
    }

    /// Whether the given vertices (one per listed part, pairwise adjacent)
    /// extend to a clique with one vertex in every part.
    pub fn extends_to_full_clique(&self, chosen: &[(usize, usize)]) -> bool {
        for (x, &u) in chosen.iter().enumerate() {
            for &w in &chosen[x + 1..] {
                if !self.has_edge(u, w) {
                    return false;
                }
            }
        }
        let n = self.parts.len();
        let mut fixed: Vec<Option<usize>> = vec![None; n];
        for &(p, a) in chosen {
            fixed[p] = Some(a);
        }
        let free: Vec<usize> = (0..n).filter(|&p| fixed[p].is_none()).collect();
        // cand[d]: candidates for free[d] given all picks before it.
        let mut base: Vec<FixedBitSet> = free
            .iter()
            .map(|&p| {
                let mut b = FixedBitSet::with_capacity(self.parts[p].len());
                b.insert_range(..);
                for &(q, a) in chosen {
                    b.intersect_with(&self.adj[q][a][p]);
                }
                b
            })
            .collect();
        self.complete(&free, 0, &mut base)
    }

    fn complete(&self, free: &[usize], depth: usize, cand: &mut Vec<FixedBitSet>) -> bool {
        if depth == free.len() {
            return true;
        }
        let p = free[depth];
        let options: Vec<usize> = cand[depth].ones().collect();
        for a in options {
            let saved: Vec<FixedBitSet> = cand[depth + 1..].to_vec();
            let mut ok = true;
            for (d, &q) in free.iter().enumerate().skip(depth + 1) {
                cand[d].intersect_with(&self.adj[p][a][q]);
                if cand[d].is_clear() {
                    ok = false;
                    break;
                }
            }
            if ok && self.complete(free, depth + 1, cand) {
                return true;
            }
            for (d, s) in saved.into_iter().enumerate() {
                cand[depth + 1 + d] = s;
            }
        }
        false
    }
}

/// Minimality of a binary complete network via its compatibility graph: the
/// network is minimal iff every allowed pair (and every unary value) lies in a
/// clique touching all parts. Pairs mentioning a value removed by a unary
/// constraint are not edges and so make the network non-minimal.
pub fn gaur_minimality(net: &Network) -> Result<MinimalityVerdict> {
    let g = NPartiteGraph::from_network(net)?;
    if !g.extends_to_full_clique(&[]) {
        return Err(Error::Precondition("network is unsolvable".into()));
    }
    for rel in net.constraints() {
        let ranks: Vec<usize> = rel.scope().ranks().map(|r| r as usize).collect();
        for t in rel.tuples() {
            let chosen: Option<Vec<(usize, usize)>> = ranks
                .iter()
                .zip(t.values())
                .map(|(&p, v)| g.vertex(p, v).map(|a| (p, a)))
                .collect();
            let ok = chosen.is_some_and(|c| g.extends_to_full_clique(&c));
            if !ok {
                let witness = MinimalityWitness {
                    scope: rel.scope().clone(),
                    tuple: t.clone(),
                };
                return Ok(MinimalityVerdict::decided(Some(witness), false));
            }
        }
    }
    Ok(MinimalityVerdict::decided(None, false))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupersymmetryOutcome {
    Supersymmetric,
    Counterexample,
    Unsatisfiable,
    InconclusiveBudget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupersymmetryVerdict {
    pub outcome: SupersymmetryOutcome,
    /// Atoms with their truth values, in atom order.
    pub counterexample: Option<Vec<(String, bool)>>,
    pub budget_hit: bool,
}

/// Checks that every assignment to every set of `k` atoms extends to a model.
///
/// Atom sets are visited in lexicographic order of atom positions and, within
/// a set, assignments count upward with false before true and the first atom
/// most significant. Formulas with fewer than `k` atoms are checked on all of
/// them. Each model found marks every (set, assignment) pair it realizes. The
/// budget applies to each SAT call.
pub fn is_supersymmetric(cnf: &Cnf, k: usize, budget: u64) -> Result<SupersymmetryVerdict> {
    if k < 1 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let verdict = |outcome, cx: Option<Vec<(String, bool)>>, budget_hit| SupersymmetryVerdict {
        outcome,
        counterexample: cx,
        budget_hit,
    };
    let mut solver = Solver::from_cnf(cnf);
    match solver.solve(budget) {
        SatOutcome::Unsat => return Ok(verdict(SupersymmetryOutcome::Unsatisfiable, None, false)),
        SatOutcome::BudgetExhausted => {
            return Ok(verdict(
                SupersymmetryOutcome::InconclusiveBudget,
                None,
                true,
            ))
        }
        SatOutcome::Sat(_) => {}
    }
    let atoms: Vec<&str> = cnf.atoms().collect();
    let n = atoms.len();
    let size = k.min(n);
    let subsets: Vec<Vec<usize>> = combinations(n, size).collect();
    let mut covered: Vec<FixedBitSet> = subsets
        .iter()
        .map(|_| FixedBitSet::with_capacity(1 << size))
        .collect();
    let mask_of = |subset: &[usize], model: &[bool]| {
        subset
            .iter()
            .fold(0usize, |m, &a| (m << 1) | usize::from(model[a]))
    };
    let mut budget_hit = false;
    for (si, subset) in subsets.iter().enumerate() {
        for mask in 0..1usize << size {
            if covered[si].contains(mask) {
                continue;
            }
            let values: Vec<bool> = (0..size)
                .map(|b| (mask >> (size - 1 - b)) & 1 == 1)
                .collect();
            let assumptions: Vec<_> = subset
                .iter()
                .zip(&values)
                .map(|(&a, &v)| lit(a, v))
                .collect();
            match solver.solve_with(&assumptions, budget) {
                SatOutcome::Sat(model) => {
                    for (sj, other) in subsets.iter().enumerate() {
                        covered[sj].insert(mask_of(other, &model));
                    }
                }
                SatOutcome::BudgetExhausted => budget_hit = true,
                SatOutcome::Unsat => {
                    let cx = subset
                        .iter()
                        .zip(values)
                        .map(|(&a, v)| (atoms[a].to_string(), v))
                        .collect();
                    return Ok(verdict(
                        SupersymmetryOutcome::Counterexample,
                        Some(cx),
                        budget_hit,
                    ));
                }
            }
        }
    }
    let outcome = if budget_hit {
        SupersymmetryOutcome::InconclusiveBudget
    } else {
        SupersymmetryOutcome::Supersymmetric
    };
    Ok(verdict(outcome, None, budget_hit))
}
