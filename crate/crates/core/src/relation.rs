//! Finite relations over rank-ordered scopes, with projection and natural join.
//!
//! Tuples are always kept sorted and duplicate-free, so two relations over the
//! same scope are equal exactly when their tuple vectors are equal.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::value::{Scope, Tuple, Value};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    scope: Scope,
    tuples: Vec<Tuple>,
}

impl Relation {
    /// Builds a relation, canonicalizing tuple order and removing duplicates.
    pub fn new(scope: Scope, tuples: impl IntoIterator<Item = Tuple>) -> Result<Self> {
        let mut tuples: Vec<Tuple> = tuples.into_iter().collect();
        if let Some(bad) = tuples.iter().find(|t| t.len() != scope.len()) {
            return Err(Error::ScopeMismatch(format!(
                "tuple {bad} has arity {} but scope {scope} has arity {}",
                bad.len(),
                scope.len()
            )));
        }
        tuples.sort_unstable();
        tuples.dedup();
        Ok(Relation { scope, tuples })
    }

    pub fn empty(scope: Scope) -> Self {
        Relation {
            scope,
            tuples: Vec::new(),
        }
    }

    /// The full Cartesian product of the given per-variable domains.
    pub fn cartesian(scope: Scope, domains: &[Vec<Value>]) -> Result<Self> {
        if domains.len() != scope.len() {
            return Err(Error::ScopeMismatch(format!(
                "{} domains supplied for scope {scope}",
                domains.len()
            )));
        }
        let mut tuples = vec![Vec::with_capacity(scope.len())];
        for dom in domains {
            let mut next = Vec::with_capacity(tuples.len() * dom.len());
            for prefix in &tuples {
                for v in dom {
                    let mut t = prefix.clone();
                    t.push(v.clone());
                    next.push(t);
                }
            }
            tuples = next;
        }
        Relation::new(scope, tuples.into_iter().map(Tuple))
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &Tuple) -> bool {
        self.tuples.binary_search(t).is_ok()
    }

    pub fn contains_values(&self, values: &[Value]) -> bool {
        self.tuples
            .binary_search_by(|t| t.0.as_slice().cmp(values))
            .is_ok()
    }

    /// Index of a tuple in canonical order, if present.
    pub fn position(&self, values: &[Value]) -> Option<usize> {
        self.tuples
            .binary_search_by(|t| t.0.as_slice().cmp(values))
            .ok()
    }

    /// All distinct values occurring anywhere in the relation.
    pub fn distinct_values(&self) -> BTreeSet<Value> {
        self.tuples
            .iter()
            .flat_map(|t| t.0.iter().cloned())
            .collect()
    }

    /// Distinct values of one column, sorted.
    pub fn column_values(&self, col: usize) -> Vec<Value> {
        let set: BTreeSet<&Value> = self.tuples.iter().map(|t| &t.0[col]).collect();
        set.into_iter().cloned().collect()
    }

    pub fn is_subset_of(&self, other: &Relation) -> bool {
        self.scope == other.scope && self.tuples.iter().all(|t| other.contains(t))
    }

    pub fn project(&self, target: &Scope) -> Result<Relation> {
        project(self, target)
    }
}

impl std::fmt::Debug for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {:?}", self.scope, self.tuples)
    }
}

/// Positions of `target`'s variables inside `scope`.
pub(crate) fn column_map(scope: &Scope, target: &Scope) -> Result<Vec<usize>> {
    target
        .vars()
        .iter()
        .map(|v| {
            scope.position(v).ok_or_else(|| {
                Error::ScopeMismatch(format!("variable {v} of {target} is not in {scope}"))
            })
        })
        .collect()
}

/// Projection onto a subscope.
pub fn project(rel: &Relation, target: &Scope) -> Result<Relation> {
    let cols = column_map(&rel.scope, target)?;
    let tuples = rel
        .tuples
        .iter()
        .map(|t| Tuple(cols.iter().map(|&c| t.0[c].clone()).collect()));
    Relation::new(target.clone(), tuples)
}

/// Same scope and same canonical tuple set.
pub fn relation_equal(a: &Relation, b: &Relation) -> bool {
    a == b
}

/// Natural join of all inputs, computed by backtracking over the union scope.
///
/// Every input is checked against the bound prefix of its own columns as soon
/// as one of its variables is bound, so only consistent partial tuples are
/// ever extended.
pub fn natural_join(rels: &[Relation]) -> Result<Relation> {
    if rels.is_empty() {
        return Err(Error::Parameter("natural join of an empty list".into()));
    }
    let union = Scope::union(rels.iter().map(|r| r.scope()))?;
    let width = union.len();

    // For each input: the union positions of its columns, and the set of all
    // prefixes of its tuples (prefix length j+1 checked once column j is bound).
    struct Input<'a> {
        positions: Vec<usize>,
        prefixes: Vec<HashSet<&'a [Value]>>,
    }
    let inputs: Vec<Input> = rels
        .iter()
        .map(|r| {
            let positions = column_map(&union, r.scope()).expect("subscope of union");
            let prefixes = (0..r.arity())
                .map(|j| r.tuples.iter().map(|t| &t.0[..=j]).collect())
                .collect();
            Input {
                positions,
                prefixes,
            }
        })
        .collect();

    // Per union position: which inputs own it, and at which column.
    let mut owners: Vec<Vec<(usize, usize)>> = vec![Vec::new(); width];
    for (i, inp) in inputs.iter().enumerate() {
        for (col, &pos) in inp.positions.iter().enumerate() {
            owners[pos].push((i, col));
        }
    }
    // Candidates: column values of the smallest owning relation.
    let candidates: Vec<Vec<Value>> = owners
        .iter()
        .map(|own| {
            let &(i, col) = own
                .iter()
                .min_by_key(|(i, _)| rels[*i].len())
                .expect("every union variable has an owner");
            rels[i].column_values(col)
        })
        .collect();

    let mut out = Vec::new();
    let mut current: Vec<Value> = Vec::with_capacity(width);
    let mut cursor = vec![0usize; width + 1];
    let mut scratch: Vec<Value> = Vec::new();
    let mut depth = 0usize;
    loop {
        if depth == width {
            out.push(Tuple(current.clone()));
            depth -= 1;
            current.pop();
            continue;
        }
        let cands = &candidates[depth];
        let mut advanced = false;
        while cursor[depth] < cands.len() {
            let v = &cands[cursor[depth]];
            cursor[depth] += 1;
            current.push(v.clone());
            let ok = owners[depth].iter().all(|&(i, col)| {
                let inp = &inputs[i];
                scratch.clear();
                scratch.extend(inp.positions[..=col].iter().map(|&p| current[p].clone()));
                inp.prefixes[col].contains(scratch.as_slice())
            });
            if ok {
                advanced = true;
                break;
            }
            current.pop();
        }
        if advanced {
            depth += 1;
            cursor[depth] = 0;
        } else {
            if depth == 0 {
                break;
            }
            depth -= 1;
            current.pop();
        }
    }
    Relation::new(union, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::VariableId;

    fn vars(n: u32) -> Vec<VariableId> {
        (0..n)
            .map(|i| VariableId::new(&format!("X{}", i + 1), i))
            .collect()
    }

    fn rel(vars: &[VariableId], idx: &[usize], rows: &[&[i64]]) -> Relation {
        let scope = Scope::new(idx.iter().map(|&i| vars[i].clone()).collect()).unwrap();
        Relation::new(scope, rows.iter().map(|r| Tuple::numbers(r))).unwrap()
    }

    #[test]
    fn canonicalizes_on_construction() {
        let v = vars(2);
        let r = rel(&v, &[0, 1], &[&[2, 1], &[1, 1], &[2, 1]]);
        assert_eq!(
            r.tuples(),
            &[Tuple::numbers(&[1, 1]), Tuple::numbers(&[2, 1])]
        );
    }

    #[test]
    fn projection_drops_column_and_dedupes() {
        let v = vars(3);
        let r = rel(&v, &[0, 1, 2], &[&[0, 0, 1], &[0, 1, 1]]);
        let target = Scope::new(vec![v[0].clone(), v[2].clone()]).unwrap();
        let p = project(&r, &target).unwrap();
        assert_eq!(p.tuples(), &[Tuple::numbers(&[0, 1])]);
        assert_eq!(project(&r, r.scope()).unwrap(), r);
    }

    #[test]
    fn projection_outside_scope_is_error() {
        let v = vars(3);
        let r = rel(&v, &[0, 1], &[&[0, 0]]);
        let target = Scope::new(vec![v[2].clone()]).unwrap();
        assert!(matches!(project(&r, &target), Err(Error::ScopeMismatch(_))));
    }

    #[test]
    fn join_with_full_product_is_neutral() {
        let v = vars(2);
        let r = rel(&v, &[0, 1], &[&[1, 2], &[2, 2]]);
        let top = Relation::cartesian(
            r.scope().clone(),
            &[vec![1.into(), 2.into()], vec![1.into(), 2.into()]],
        )
        .unwrap();
        assert_eq!(natural_join(&[r.clone(), top]).unwrap(), r);
    }

    #[test]
    fn join_of_disjoint_scopes_is_product() {
        let v = vars(2);
        let a = rel(&v, &[0], &[&[1], &[2]]);
        let b = rel(&v, &[1], &[&[5]]);
        let j = natural_join(&[b, a]).unwrap();
        assert_eq!(
            j.tuples(),
            &[Tuple::numbers(&[1, 5]), Tuple::numbers(&[2, 5])]
        );
    }

    #[test]
    fn join_with_empty_input_is_empty() {
        let v = vars(2);
        let a = rel(&v, &[0, 1], &[&[1, 1]]);
        let b = Relation::empty(Scope::new(vec![v[1].clone()]).unwrap());
        assert!(natural_join(&[a, b]).unwrap().is_empty());
        assert!(natural_join(&[]).is_err());
    }
}
