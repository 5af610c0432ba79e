//! k-decomposability and join dependencies of a single relation.
//!
//! A tuple lies in the join of the projections of ρ onto a schema iff, for
//! every scope s, some ρ-tuple agrees with it on s. With one bitset over
//! ρ's tuples per (column, value), that is a non-empty intersection test.
//! The counterexample search binds columns in rank order and values in
//! canonical order, checks every scope as soon as its last column is bound,
//! and tracks the set of ρ-tuples still agreeing with the prefix; a complete
//! tuple with no agreeing ρ-tuple is a counterexample.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::Schema;
use crate::relation::Relation;
use crate::value::{Tuple, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompOutcome {
    Decomposable,
    Counterexample,
    InconclusiveBudget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Generic,
    TrivialK,
    Univalued,
    BivaluedK2,
    FullScope,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompVerdict {
    pub outcome: DecompOutcome,
    pub t0: Option<Tuple>,
    pub route: Route,
    pub nodes: u64,
}

impl DecompVerdict {
    fn decomposable(route: Route, nodes: u64) -> Self {
        DecompVerdict {
            outcome: DecompOutcome::Decomposable,
            t0: None,
            route,
            nodes,
        }
    }
}

type Bits = Vec<u64>;

fn and_nonempty(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

fn and_into(dst: &mut [u64], a: &[u64], b: &[u64]) -> bool {
    let mut any = 0;
    for ((d, x), y) in dst.iter_mut().zip(a).zip(b) {
        *d = x & y;
        any |= *d;
    }
    any != 0
}

/// Per-column value lists and (column, value) → ρ-tuple bitsets.
struct Index {
    words: usize,
    values: Vec<Vec<Value>>,
    bits: Vec<Vec<Bits>>,
}

impl Index {
    fn new(rho: &Relation) -> Self {
        let words = rho.len().div_ceil(64).max(1);
        let values: Vec<Vec<Value>> = (0..rho.arity()).map(|c| rho.column_values(c)).collect();
        let mut bits: Vec<Vec<Bits>> = values
            .iter()
            .map(|vals| vec![vec![0u64; words]; vals.len()])
            .collect();
        for (ti, t) in rho.tuples().iter().enumerate() {
            for (c, v) in t.values().iter().enumerate() {
                let x = values[c].binary_search(v).expect("column value");
                bits[c][x][ti / 64] |= 1 << (ti % 64);
            }
        }
        Index {
            words,
            values,
            bits,
        }
    }

    fn value_index(&self, col: usize, v: &Value) -> Option<usize> {
        self.values[col].binary_search(v).ok()
    }

    /// Whether some ρ-tuple agrees with `t` on all `cols`.
    fn agrees(&self, t: &[Value], cols: &[usize]) -> bool {
        let mut acc = vec![u64::MAX; self.words];
        for &c in cols {
            let Some(x) = self.value_index(c, &t[c]) else {
                return false;
            };
            for (a, b) in acc.iter_mut().zip(&self.bits[c][x]) {
                *a &= b;
            }
        }
        acc.iter().any(|&w| w != 0)
    }
}

/// Which scopes the join ranges over.
enum Checks {
    /// All scopes of arity at most k.
    Complete(usize),
    /// `prefixes[d]`: for each scope containing column d, its columns before d.
    Explicit(Vec<Vec<Vec<usize>>>),
}

struct Search<'a> {
    index: &'a Index,
    checks: Checks,
    arity: usize,
    assign: Vec<usize>,
    agree: Vec<Bits>,
    scratch: Vec<Bits>,
    nodes: u64,
    budget: u64,
}

enum Found {
    Counterexample(Vec<usize>),
    Exhausted,
    Budget,
}

impl Search<'_> {
    fn consistent(&mut self, d: usize, x: usize) -> bool {
        let col = &self.index.bits[d][x];
        match &self.checks {
            Checks::Complete(k) => {
                let mut scratch = std::mem::take(&mut self.scratch);
                let ok = self.subsets(d, 0, k - 1, col, &mut scratch);
                self.scratch = scratch;
                ok
            }
            Checks::Explicit(prefixes) => prefixes[d].iter().all(|cols| {
                let mut acc = col.clone();
                for &j in cols {
                    for (a, b) in acc.iter_mut().zip(&self.index.bits[j][self.assign[j]]) {
                        *a &= b;
                    }
                }
                acc.iter().any(|&w| w != 0)
            }),
        }
    }

    /// Every subset of columns `start..d` of size at most `left`, together
    /// with the intersection `cur`, must leave some ρ-tuple.
    fn subsets(
        &self,
        d: usize,
        start: usize,
        left: usize,
        cur: &[u64],
        scratch: &mut [Bits],
    ) -> bool {
        if left == 0 {
            return true;
        }
        let (mine, rest) = scratch.split_first_mut().expect("scratch depth");
        for j in start..d {
            let b = &self.index.bits[j][self.assign[j]];
            if left == 1 || j + 1 == d {
                if !and_nonempty(cur, b) {
                    return false;
                }
            } else {
                if !and_into(mine, cur, b) {
                    return false;
                }
                if !self.subsets(d, j + 1, left - 1, mine, rest) {
                    return false;
                }
            }
        }
        true
    }

    fn run(&mut self, d: usize) -> Found {
        if d == self.arity {
            return if self.agree[d].iter().all(|&w| w == 0) {
                Found::Counterexample(self.assign.clone())
            } else {
                Found::Exhausted
            };
        }
        for x in 0..self.index.values[d].len() {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Found::Budget;
            }
            self.assign[d] = x;
            if !self.consistent(d, x) {
                continue;
            }
            let (before, after) = self.agree.split_at_mut(d + 1);
            and_into(&mut after[0], &before[d], &self.index.bits[d][x]);
            match self.run(d + 1) {
                Found::Exhausted => {}
                other => return other,
            }
        }
        Found::Exhausted
    }
}

fn search(rho: &Relation, checks: Checks, route: Route, budget: u64) -> DecompVerdict {
    let index = Index::new(rho);
    let arity = rho.arity();
    let depth = match checks {
        Checks::Complete(k) => k,
        Checks::Explicit(_) => 1,
    };
    let mut s = Search {
        index: &index,
        checks,
        arity,
        assign: vec![0; arity],
        agree: vec![vec![u64::MAX; index.words]; arity + 1],
        scratch: vec![vec![0; index.words]; depth],
        nodes: 0,
        budget,
    };
    let found = s.run(0);
    let nodes = s.nodes;
    match found {
        Found::Exhausted => DecompVerdict::decomposable(route, nodes),
        Found::Budget => DecompVerdict {
            outcome: DecompOutcome::InconclusiveBudget,
            t0: None,
            route,
            nodes,
        },
        Found::Counterexample(a) => {
            let t0 = Tuple(
                a.iter()
                    .enumerate()
                    .map(|(c, &x)| index.values[c][x].clone())
                    .collect(),
            );
            DecompVerdict {
                outcome: DecompOutcome::Counterexample,
                t0: Some(t0),
                route,
                nodes,
            }
        }
    }
}

/// Whether t0 is a genuine counterexample for ρ and all scopes of arity ≤ k:
/// t0 ∉ ρ and every projection of t0 onto at most k columns occurs in ρ's
/// projection. Checking the scopes of arity exactly min(k, arity) suffices.
pub fn validate_k_counterexample(rho: &Relation, k: usize, t0: &Tuple) -> bool {
    if t0.len() != rho.arity() || rho.contains(t0) {
        return false;
    }
    let index = Index::new(rho);
    let size = k.min(rho.arity());
    crate::network::combinations(rho.arity(), size).all(|cols| index.agrees(t0.values(), &cols))
}

/// Like [`validate_k_counterexample`] for an explicit schema.
pub fn validate_schema_counterexample(rho: &Relation, schema: &Schema, t0: &Tuple) -> Result<bool> {
    if t0.len() != rho.arity() || rho.contains(t0) {
        return Ok(false);
    }
    let index = Index::new(rho);
    for s in schema.scopes() {
        let cols = crate::relation::column_map(rho.scope(), s)?;
        if !index.agrees(t0.values(), &cols) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn checked(rho: &Relation, k: usize, v: DecompVerdict) -> DecompVerdict {
    if let Some(t0) = &v.t0 {
        assert!(
            validate_k_counterexample(rho, k, t0),
            "invalid counterexample {t0} for k = {k}"
        );
    }
    v
}

/// Generic decision of sol(Π_{S_k}(ρ)) = ρ. The counterexample, if any, is
/// the lexicographically least tuple of the join outside ρ.
pub fn is_k_decomposable(rho: &Relation, k: usize, budget: u64) -> Result<DecompVerdict> {
    if k < 1 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let v = search(rho, Checks::Complete(k), Route::Generic, budget);
    Ok(checked(rho, k, v))
}

/// Whether ρ satisfies the join dependency over `schema`.
pub fn join_dependency_holds(
    rho: &Relation,
    schema: &Schema,
    budget: u64,
) -> Result<DecompVerdict> {
    let mut prefixes: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); rho.arity()];
    let mut covered = vec![false; rho.arity()];
    for s in schema.scopes() {
        let cols = crate::relation::column_map(rho.scope(), s)
            .map_err(|e| Error::Parameter(format!("schema scope outside the relation: {e}")))?;
        for (i, &c) in cols.iter().enumerate() {
            covered[c] = true;
            prefixes[c].insert(cols[..i].to_vec());
        }
    }
    if let Some(c) = covered.iter().position(|&x| !x) {
        return Err(Error::Parameter(format!(
            "schema does not cover variable {}",
            rho.scope().vars()[c]
        )));
    }
    let checks = Checks::Explicit(
        prefixes
            .into_iter()
            .map(|p| p.into_iter().collect())
            .collect(),
    );
    let v = search(rho, checks, Route::Generic, budget);
    if let Some(t0) = &v.t0 {
        assert!(
            validate_schema_counterexample(rho, schema, t0)?,
            "invalid counterexample {t0}"
        );
    }
    Ok(v)
}

/// Dispatches to the cheapest applicable decision procedure: at most one
/// distinct value, k at least the arity, k = 1, two values with k = 2, and
/// otherwise the generic search.
pub fn frontier_route(rho: &Relation, k: usize, budget: u64) -> Result<DecompVerdict> {
    if k < 1 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let distinct = rho.distinct_values().len();
    if distinct <= 1 {
        return Ok(DecompVerdict::decomposable(Route::Univalued, 0));
    }
    if k >= rho.arity() {
        return Ok(DecompVerdict::decomposable(Route::FullScope, 0));
    }
    if k == 1 {
        return Ok(checked(rho, 1, unary_product(rho)));
    }
    if distinct == 2 && k == 2 {
        return bivalued_2decomposable(rho);
    }
    is_k_decomposable(rho, k, budget)
}

/// k = 1: the join is the product of the column value sets. Walking the
/// product and ρ together in lexicographic order finds the least missing
/// tuple within |ρ| + 1 steps.
fn unary_product(rho: &Relation) -> DecompVerdict {
    let cols: Vec<Vec<Value>> = (0..rho.arity()).map(|c| rho.column_values(c)).collect();
    if rho.is_empty() {
        return DecompVerdict::decomposable(Route::TrivialK, 0);
    }
    let mut odo = vec![0usize; cols.len()];
    let mut steps = 0u64;
    for t in rho.tuples() {
        steps += 1;
        let current: Vec<Value> = odo
            .iter()
            .enumerate()
            .map(|(c, &i)| cols[c][i].clone())
            .collect();
        if current.as_slice() != t.values() {
            return DecompVerdict {
                outcome: DecompOutcome::Counterexample,
                t0: Some(Tuple(current)),
                route: Route::TrivialK,
                nodes: steps,
            };
        }
        // advance the odometer
        let mut c = cols.len();
        loop {
            if c == 0 {
                return DecompVerdict::decomposable(Route::TrivialK, steps);
            }
            c -= 1;
            odo[c] += 1;
            if odo[c] < cols[c].len() {
                break;
            }
            odo[c] = 0;
        }
    }
    let current: Vec<Value> = odo
        .iter()
        .enumerate()
        .map(|(c, &i)| cols[c][i].clone())
        .collect();
    DecompVerdict {
        outcome: DecompOutcome::Counterexample,
        t0: Some(Tuple(current)),
        route: Route::TrivialK,
        nodes: steps,
    }
}

/// 2-decomposability of a relation over at most two values: decomposable
/// iff closed under coordinatewise majority. Triples are scanned starting
/// from the canonically largest tuples; the first majority tuple outside ρ
/// is the counterexample.
pub fn bivalued_2decomposable(rho: &Relation) -> Result<DecompVerdict> {
    let values: Vec<Value> = rho.distinct_values().into_iter().collect();
    if values.len() > 2 {
        return Err(Error::Precondition(format!(
            "relation has {} distinct values",
            values.len()
        )));
    }
    if rho.arity() <= 2 || values.len() <= 1 {
        return Ok(DecompVerdict::decomposable(Route::BivaluedK2, 0));
    }
    let ts: Vec<&Tuple> = rho.tuples().iter().rev().collect();
    let mut steps = 0u64;
    for a in 0..ts.len() {
        for b in a + 1..ts.len() {
            for c in b + 1..ts.len() {
                steps += 1;
                let maj: Vec<Value> = (0..rho.arity())
                    .map(|i| {
                        let (x, y, z) = (&ts[a][i], &ts[b][i], &ts[c][i]);
                        if x == y || x == z {
                            x.clone()
                        } else {
                            y.clone()
                        }
                    })
                    .collect();
                if !rho.contains_values(&maj) {
                    return Ok(checked(
                        rho,
                        2,
                        DecompVerdict {
                            outcome: DecompOutcome::Counterexample,
                            t0: Some(Tuple(maj)),
                            route: Route::BivaluedK2,
                            nodes: steps,
                        },
                    ));
                }
            }
        }
    }
    Ok(DecompVerdict::decomposable(Route::BivaluedK2, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::{Scope, VariableId};

    fn rel(arity: u32, rows: &[&[i64]]) -> Relation {
        let scope = Scope::new(
            (0..arity)
                .map(|i| VariableId::new(&format!("X{}", i + 1), i))
                .collect(),
        )
        .unwrap();
        Relation::new(scope, rows.iter().map(|r| Tuple::numbers(r))).unwrap()
    }

    fn parity() -> Relation {
        rel(3, &[&[0, 0, 0], &[0, 1, 1], &[1, 0, 1], &[1, 1, 0]])
    }

    #[test]
    fn parity_is_not_2_decomposable() {
        let v = is_k_decomposable(&parity(), 2, 1000).unwrap();
        assert_eq!(v.outcome, DecompOutcome::Counterexample);
        assert_eq!(v.t0, Some(Tuple::numbers(&[0, 0, 1])));
        let v = bivalued_2decomposable(&parity()).unwrap();
        assert_eq!(v.t0, Some(Tuple::numbers(&[1, 1, 1])));
        let v = frontier_route(&parity(), 2, 1000).unwrap();
        assert_eq!(v.route, Route::BivaluedK2);
        assert_eq!(
            is_k_decomposable(&parity(), 3, 1000).unwrap().outcome,
            DecompOutcome::Decomposable
        );
    }

    #[test]
    fn schema_variants() {
        let rho = parity();
        let full = Schema::new([rho.scope().clone()]);
        let v = join_dependency_holds(&rho, &full, 1000).unwrap();
        assert_eq!(v.outcome, DecompOutcome::Decomposable);
        let pairs = Schema::new(crate::network::combinations(3, 2).map(|c| {
            Scope::new(c.iter().map(|&i| rho.scope().vars()[i].clone()).collect()).unwrap()
        }));
        let v = join_dependency_holds(&rho, &pairs, 1000).unwrap();
        assert_eq!(v.t0, Some(Tuple::numbers(&[0, 0, 1])));
        let partial = Schema::new([Scope::new(vec![rho.scope().vars()[0].clone()]).unwrap()]);
        assert!(join_dependency_holds(&rho, &partial, 1000).is_err());
    }

    #[test]
    fn routes() {
        let uni = rel(5, &[&[7, 7, 7, 7, 7]]);
        assert_eq!(frontier_route(&uni, 2, 10).unwrap().route, Route::Univalued);
        let rows: Vec<Vec<i64>> = (0..8)
            .map(|m| vec![0, m >> 2 & 1, m >> 1 & 1, m & 1])
            .collect();
        let rows: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
        let r = rel(4, &rows);
        let v = bivalued_2decomposable(&r).unwrap();
        assert_eq!(v.outcome, DecompOutcome::Decomposable);
        let v = frontier_route(&rel(2, &[&[0, 0], &[1, 1]]), 1, 10).unwrap();
        assert_eq!(v.route, Route::TrivialK);
        assert_eq!(v.t0, Some(Tuple::numbers(&[0, 1])));
        let v = frontier_route(&rel(2, &[&[0, 0], &[0, 1], &[1, 0], &[1, 1]]), 1, 10).unwrap();
        assert_eq!(v.outcome, DecompOutcome::Decomposable);
        let three = rel(2, &[&[0, 1], &[2, 2]]);
        assert!(bivalued_2decomposable(&rel(3, &[&[0, 1, 2]])).is_err());
        assert_eq!(
            frontier_route(&three, 2, 10).unwrap().route,
            Route::FullScope
        );
    }

    #[test]
    fn budget_is_reported() {
        let v = is_k_decomposable(&parity(), 2, 2).unwrap();
        assert_eq!(v.outcome, DecompOutcome::InconclusiveBudget);
    }
}
