//! Constraint networks, complete schemas and solution search.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::relation::Relation;
use crate::search::{SearchModel, SearchStatus};
use crate::value::{PartialAssignment, Scope, Tuple, Value, VariableId};

/// A constraint is just a relation; its scope is the relation's scope.
pub type Constraint = Relation;

/// Ordered set of scopes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema(BTreeSet<Scope>);

impl Schema {
    pub fn new(scopes: impl IntoIterator<Item = Scope>) -> Self {
        Schema(scopes.into_iter().collect())
    }

    pub fn scopes(&self) -> impl Iterator<Item = &Scope> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, scope: &Scope) -> bool {
        self.0.contains(scope)
    }

    /// Union of all scopes, in rank order.
    pub fn variables(&self) -> BTreeSet<VariableId> {
        self.0
            .iter()
            .flat_map(|s| s.vars().iter().cloned())
            .collect()
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Network {
    vars: Vec<VariableId>,
    domains: Vec<Vec<Value>>,
    by_name: HashMap<String, usize>,
    constraints: BTreeMap<Scope, Relation>,
}

impl std::fmt::Debug for Network {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Network")
            .field("vars", &self.vars)
            .field("domains", &self.domains)
            .field(
                "constraints",
                &self.constraints.values().collect::<Vec<_>>(),
            )
            .finish()
    }
}

impl Network {
    /// Creates a network without constraints. The order of `vars` defines ≺.
    pub fn new<S: AsRef<str>>(vars: impl IntoIterator<Item = (S, Vec<Value>)>) -> Result<Self> {
        let mut net = Network {
            vars: Vec::new(),
            domains: Vec::new(),
            by_name: HashMap::new(),
            constraints: BTreeMap::new(),
        };
        for (name, mut domain) in vars {
            let name = name.as_ref();
            if name.is_empty() {
                return Err(Error::Input("empty variable name".into()));
            }
            let rank = net.vars.len();
            if net.by_name.insert(name.to_string(), rank).is_some() {
                return Err(Error::Input(format!("duplicate variable {name}")));
            }
            domain.sort();
            domain.dedup();
            net.vars.push(VariableId::new(name, rank as u32));
            net.domains.push(domain);
        }
        Ok(net)
    }

    /// Adds a constraint. A second constraint on the same scope is intersected
    /// with the first, keeping at most one constraint per variable set.
    pub fn add_constraint(&mut self, rel: Relation) -> Result<()> {
        for (col, var) in rel.scope().vars().iter().enumerate() {
            let rank = var.rank() as usize;
            if self.vars.get(rank) != Some(var) {
                return Err(Error::ScopeMismatch(format!(
                    "variable {var} is not part of the network"
                )));
            }
            let dom = &self.domains[rank];
            if let Some(t) = rel
                .tuples()
                .iter()
                .find(|t| dom.binary_search(&t[col]).is_err())
            {
                return Err(Error::Domain(format!(
                    "value {} of tuple {t} is outside dom({var})",
                    t[col]
                )));
            }
        }
        let merged = match self.constraints.remove(rel.scope()) {
            Some(old) => {
                let kept = old.tuples().iter().filter(|t| rel.contains(t)).cloned();
                Relation::new(rel.scope().clone(), kept)?
            }
            None => rel,
        };
        self.constraints.insert(merged.scope().clone(), merged);
        Ok(())
    }

    pub fn with_constraint(mut self, rel: Relation) -> Result<Self> {
        self.add_constraint(rel)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn variables(&self) -> &[VariableId] {
        &self.vars
    }

    pub fn domains(&self) -> &[Vec<Value>] {
        &self.domains
    }

    pub fn domain(&self, var: &VariableId) -> &[Value] {
        &self.domains[var.rank() as usize]
    }

    pub fn var(&self, name: &str) -> Option<&VariableId> {
        self.by_name.get(name).map(|&i| &self.vars[i])
    }

    pub fn require_var(&self, name: &str) -> Result<&VariableId> {
        self.var(name)
            .ok_or_else(|| Error::Input(format!("unknown variable {name}")))
    }

    /// Scope from variable names in any order.
    pub fn scope(&self, names: &[&str]) -> Result<Scope> {
        let vars = names
            .iter()
            .map(|n| self.require_var(n).cloned())
            .collect::<Result<Vec<_>>>()?;
        Scope::from_unsorted(vars)
    }

    /// The scope of all variables.
    pub fn full_scope(&self) -> Option<Scope> {
        Scope::new(self.vars.clone()).ok()
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Relation> {
        self.constraints.values()
    }

    pub fn constraint(&self, scope: &Scope) -> Option<&Relation> {
        self.constraints.get(scope)
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn schema(&self) -> Schema {
        Schema::new(self.constraints.keys().cloned())
    }

    /// Largest constraint arity, 0 without constraints.
    pub fn arity(&self) -> usize {
        self.constraints.keys().map(Scope::len).max().unwrap_or(0)
    }

    /// True if every constraint relation holds on the full tuple.
    pub fn is_solution(&self, t: &Tuple) -> bool {
        t.len() == self.vars.len()
            && t.values()
                .iter()
                .zip(&self.domains)
                .all(|(v, d)| d.binary_search(v).is_ok())
            && self.constraints.values().all(|rel| {
                let proj: Vec<Value> = rel.scope().ranks().map(|r| t[r as usize].clone()).collect();
                rel.contains_values(&proj)
            })
    }
}

/// All scopes of arity 1..=k over `vars`, ordered by arity then rank.
pub fn complete_schema(vars: &[VariableId], k: usize) -> Result<Schema> {
    if k < 1 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let mut sorted = vars.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut scopes = Vec::new();
    for size in 1..=k.min(sorted.len()) {
        for combo in combinations(sorted.len(), size) {
            scopes.push(Scope::new(
                combo.iter().map(|&i| sorted[i].clone()).collect(),
            )?);
        }
    }
    Ok(Schema::new(scopes))
}

/// Index combinations of `size` out of `0..n`, lexicographic.
pub(crate) fn combinations(n: usize, size: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = if size <= n {
        Some((0..size).collect())
    } else {
        None
    };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let c = current.as_mut().expect("present");
        let mut i = size;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if c[i] < n - size + i {
                c[i] += 1;
                for j in i + 1..size {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

/// Adds the trivial Cartesian-product constraint for every missing scope of S_k.
pub fn complete_network(net: &Network, k: usize) -> Result<Network> {
    let arity = net.arity();
    if arity > k {
        return Err(Error::Arity { arity, k });
    }
    let mut out = net.clone();
    for scope in complete_schema(&net.vars, k)?.scopes() {
        if out.constraint(scope).is_none() {
            let doms: Vec<Vec<Value>> = scope
                .ranks()
                .map(|r| net.domains[r as usize].clone())
                .collect();
            out.add_constraint(Relation::cartesian(scope.clone(), &doms)?)?;
        }
    }
    Ok(out)
}

/// sol(N) as a relation over all variables. A network without variables has
/// no scope to carry a relation, so this returns `None` for it.
pub fn solve_all(net: &Network) -> Option<Relation> {
    let scope = net.full_scope()?;
    let model = SearchModel::new(net);
    let mut out = Vec::new();
    model.search(&[], u64::MAX, |a| {
        out.push(model.to_tuple(a));
        ControlFlow::Continue(())
    });
    Some(Relation::new(scope, out).expect("solutions match the full scope"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FindOutcome {
    Found(Tuple),
    NoSolution,
    BudgetExhausted,
}

/// Translates a partial assignment into search pins. `Ok(None)` means a pinned
/// value lies outside its domain, so no solution can extend it.
pub(crate) fn pins_for(
    net: &Network,
    model: &SearchModel,
    pinned: &PartialAssignment,
) -> Result<Option<Vec<(usize, u32)>>> {
    if let Some(var) = pinned
        .keys()
        .find(|v| net.vars.get(v.rank() as usize) != Some(*v))
    {
        return Err(Error::Input(format!("unknown variable {var}")));
    }
    let mut pins = Vec::with_capacity(pinned.len());
    for (var, value) in pinned {
        let rank = var.rank() as usize;
        match model.value_index(rank, value) {
            Some(i) => pins.push((rank, i)),
            None => return Ok(None),
        }
    }
    Ok(Some(pins))
}

/// The canonically first solution extending `pinned`.
pub fn find_solution(
    net: &Network,
    pinned: &PartialAssignment,
    budget: u64,
) -> Result<FindOutcome> {
    let model = SearchModel::new(net);
    let Some(pins) = pins_for(net, &model, pinned)? else {
        return Ok(FindOutcome::NoSolution);
    };
    let (found, status) = model.first(&pins, budget);
    Ok(match (found, status) {
        (Some(a), _) => FindOutcome::Found(model.to_tuple(&a)),
        (None, SearchStatus::BudgetExhausted) => FindOutcome::BudgetExhausted,
        (None, _) => FindOutcome::NoSolution,
    })
}
