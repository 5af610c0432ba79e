//! Minimal networks and their witness-extended form.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{complete_schema, Network};
use crate::relation::Relation;
use crate::search::SearchModel;
use crate::value::{Scope, Tuple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Objective {
    pub var: String,
    pub direction: Direction,
}

/// Order on solutions: the objective first (if any), then canonical order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceSpec {
    #[serde(default)]
    pub objective: Option<Objective>,
}

impl PreferenceSpec {
    pub fn none() -> Self {
        PreferenceSpec { objective: None }
    }

    pub fn min(var: &str) -> Self {
        PreferenceSpec {
            objective: Some(Objective {
                var: var.to_string(),
                direction: Direction::Min,
            }),
        }
    }

    pub fn max(var: &str) -> Self {
        PreferenceSpec {
            objective: Some(Objective {
                var: var.to_string(),
                direction: Direction::Max,
            }),
        }
    }

    /// Resolves the objective to a column of full tuples of `net`.
    pub fn resolve(&self, net: &Network) -> Result<Option<(usize, Direction)>> {
        match &self.objective {
            None => Ok(None),
            Some(o) => {
                let var = net.require_var(&o.var)?;
                Ok(Some((var.rank() as usize, o.direction)))
            }
        }
    }

    /// Compares two full solutions; `Less` means `a` is preferred.
    pub fn compare(&self, net: &Network, a: &Tuple, b: &Tuple) -> Result<Ordering> {
        Ok(compare_with(self.resolve(net)?, a, b))
    }
}

pub(crate) fn compare_with(obj: Option<(usize, Direction)>, a: &Tuple, b: &Tuple) -> Ordering {
    let primary = match obj {
        None => Ordering::Equal,
        Some((col, Direction::Min)) => a[col].cmp(&b[col]),
        Some((col, Direction::Max)) => b[col].cmp(&a[col]),
    };
    primary.then_with(|| a.cmp(b))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedRow {
    pub tuple: Tuple,
    pub witnesses: Vec<Tuple>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedConstraint {
    pub scope: Scope,
    pub rows: Vec<ExtendedRow>,
}

/// M_k(N) where every tuple carries up to K preferred full solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedNetwork {
    pub base: Network,
    pub k: usize,
    pub top_k: usize,
    pub preference: PreferenceSpec,
    /// One entry per base constraint, in canonical scope order.
    pub extended: Vec<ExtendedConstraint>,
}

impl ExtendedNetwork {
    pub fn constraint(&self, scope: &Scope) -> Option<&ExtendedConstraint> {
        self.extended
            .binary_search_by(|c| c.scope.cmp(scope))
            .ok()
            .map(|i| &self.extended[i])
    }

    /// True when the base network has no solution (every relation is empty).
    pub fn is_unsolvable(&self) -> bool {
        !self.base.is_empty() && self.base.constraints().any(Relation::is_empty)
    }

    /// Machine check of the witness invariants against the source network.
    /// Returns a description of every violation found.
    pub fn integrity_violations(&self, source: &Network) -> Vec<String> {
        let mut out = Vec::new();
        let obj = match self.preference.resolve(source) {
            Ok(o) => o,
            Err(e) => return vec![e.to_string()],
        };
        let base_scopes: Vec<&Scope> = self.base.constraints().map(Relation::scope).collect();
        let ext_scopes: Vec<&Scope> = self.extended.iter().map(|c| &c.scope).collect();
        if base_scopes != ext_scopes {
            out.push("extended scopes differ from the base schema".into());
        }
        for ec in &self.extended {
            let base_rows: Vec<&Tuple> = self
                .base
                .constraint(&ec.scope)
                .map(|r| r.tuples().iter().collect())
                .unwrap_or_default();
            let rows: Vec<&Tuple> = ec.rows.iter().map(|r| &r.tuple).collect();
            if rows != base_rows {
                out.push(format!(
                    "rows of {} differ from the base relation",
                    ec.scope
                ));
            }
            for row in &ec.rows {
                if row.witnesses.is_empty() || row.witnesses.len() > self.top_k {
                    out.push(format!(
                        "row {} of {} has {} witnesses",
                        row.tuple,
                        ec.scope,
                        row.witnesses.len()
                    ));
                }
                for w in &row.witnesses {
                    if !source.is_solution(w) {
                        out.push(format!("witness {w} of {} is not a solution", ec.scope));
                    }
                    let proj: Vec<_> = ec.scope.ranks().map(|r| w[r as usize].clone()).collect();
                    if proj != row.tuple.values() {
                        out.push(format!("witness {w} does not project onto {}", row.tuple));
                    }
                }
                for pair in row.witnesses.windows(2) {
                    if compare_with(obj, &pair[0], &pair[1]) != Ordering::Less {
                        out.push(format!(
                            "witnesses {} and {} of {} are out of preference order",
                            pair[0], pair[1], row.tuple
                        ));
                    }
                }
            }
        }
        out
    }
}

/// Projections of every solution onto every scope, collected in one pass.
struct Projection {
    scope: Scope,
    cols: Vec<usize>,
    rows: HashMap<Vec<u32>, Vec<usize>>,
}

fn project_solutions(
    net: &Network,
    k: usize,
    keep: usize,
    obj: Option<(usize, Direction)>,
) -> Result<(Vec<Projection>, Vec<Tuple>)> {
    let schema = complete_schema(net.variables(), k)?;
    let mut projections: Vec<Projection> = schema
        .scopes()
        .map(|s| Projection {
            scope: s.clone(),
            cols: s.ranks().map(|r| r as usize).collect(),
            rows: HashMap::new(),
        })
        .collect();
    let model = SearchModel::new(net);
    let mut solutions: Vec<Tuple> = Vec::new();
    model.search(&[], u64::MAX, |a| {
        let id = solutions.len();
        solutions.push(model.to_tuple(a));
        let sols = &solutions;
        for p in projections.iter_mut() {
            let key: Vec<u32> = p.cols.iter().map(|&c| a[c]).collect();
            let list = p.rows.entry(key).or_default();
            if keep == 0 {
                continue;
            }
            // Solutions arrive in canonical order, so ties keep arrival order.
            let at = list
                .iter()
                .position(|&j| compare_with(obj, &sols[id], &sols[j]) == Ordering::Less)
                .unwrap_or(list.len());
            if at < keep {
                list.insert(at, id);
                list.truncate(keep);
            }
        }
        ControlFlow::Continue(())
    });
    Ok((projections, solutions))
}

fn index_to_tuple(net: &Network, cols: &[usize], key: &[u32]) -> Tuple {
    Tuple(
        cols.iter()
            .zip(key)
            .map(|(&c, &i)| net.domains()[c][i as usize].clone())
            .collect(),
    )
}

/// M_k(N): the projection of sol(N) onto every scope of S_k.
pub fn minimal_network(net: &Network, k: usize) -> Result<Network> {
    let (projections, _) = project_solutions(net, k, 0, None)?;
    assemble_base(net, &projections)
}

fn assemble_base(net: &Network, projections: &[Projection]) -> Result<Network> {
    let mut out = Network::new(
        net.variables()
            .iter()
            .map(|v| (v.name().to_string(), net.domain(v).to_vec())),
    )?;
    for p in projections {
        let tuples = p.rows.keys().map(|key| index_to_tuple(net, &p.cols, key));
        out.add_constraint(Relation::new(p.scope.clone(), tuples)?)?;
    }
    Ok(out)
}

/// M⁺_k(N): M_k(N) with the `top_k` preferred witnesses on every row.
pub fn extended_minimal_network(
    net: &Network,
    k: usize,
    top_k: usize,
    preference: &PreferenceSpec,
) -> Result<ExtendedNetwork> {
    if top_k < 1 {
        return Err(Error::Parameter("K must be at least 1".into()));
    }
    let obj = preference.resolve(net)?;
    let (projections, solutions) = project_solutions(net, k, top_k, obj)?;
    let base = assemble_base(net, &projections)?;
    let mut extended: Vec<ExtendedConstraint> = projections
        .iter()
        .map(|p| {
            let mut rows: Vec<ExtendedRow> = p
                .rows
                .iter()
                .map(|(key, ids)| ExtendedRow {
                    tuple: index_to_tuple(net, &p.cols, key),
                    witnesses: ids.iter().map(|&i| solutions[i].clone()).collect(),
                })
                .collect();
            rows.sort_by(|a, b| a.tuple.cmp(&b.tuple));
            ExtendedConstraint {
                scope: p.scope.clone(),
                rows,
            }
        })
        .collect();
    extended.sort_by(|a, b| a.scope.cmp(&b.scope));
    Ok(ExtendedNetwork {
        base,
        k,
        top_k,
        preference: preference.clone(),
        extended,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;

    fn chain() -> Network {
        let dom = || (1..=3).map(Value::from).collect::<Vec<_>>();
        let mut net = Network::new([("A", dom()), ("B", dom()), ("C", dom())]).unwrap();
        let ab = net.scope(&["A", "B"]).unwrap();
        let bc = net.scope(&["B", "C"]).unwrap();
        let lt = |a: i64, b: i64| a < b;
        let rows = |f: &dyn Fn(i64, i64) -> bool| {
            let mut v = Vec::new();
            for a in 1..=3 {
                for b in 1..=3 {
                    if f(a, b) {
                        v.push(Tuple::numbers(&[a, b]));
                    }
                }
            }
            v
        };
        net.add_constraint(Relation::new(ab, rows(&lt)).unwrap())
            .unwrap();
        net.add_constraint(Relation::new(bc, rows(&|a, b| a != b)).unwrap())
            .unwrap();
        net
    }

    #[test]
    fn minimal_network_of_chain() {
        let m = minimal_network(&chain(), 2).unwrap();
        assert_eq!(m.constraint_count(), 6);
        let a = m.constraint(&m.scope(&["A"]).unwrap()).unwrap();
        assert_eq!(a.tuples(), &[Tuple::numbers(&[1]), Tuple::numbers(&[2])]);
    }

    #[test]
    fn witnesses_follow_preference() {
        let net = chain();
        let ext = extended_minimal_network(&net, 2, 2, &PreferenceSpec::max("C")).unwrap();
        assert!(ext.integrity_violations(&net).is_empty());
        let row = &ext.constraint(&net.scope(&["A"]).unwrap()).unwrap().rows[0];
        assert_eq!(
            row.witnesses,
            vec![Tuple::numbers(&[1, 2, 3]), Tuple::numbers(&[1, 3, 2])]
        );
    }

    #[test]
    fn bad_parameters() {
        let net = chain();
        assert!(extended_minimal_network(&net, 2, 0, &PreferenceSpec::none()).is_err());
        assert!(extended_minimal_network(&net, 2, 1, &PreferenceSpec::min("Q")).is_err());
        assert!(minimal_network(&net, 0).is_err());
    }
}
