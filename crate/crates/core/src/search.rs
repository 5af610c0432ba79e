//! Backtracking search over a compiled network.
//!
//! Variables are assigned in rank order. Unary constraints and pins restrict
//! the initial domains. Every constraint of arity at least two is enforced by
//! forward checking: once all but its last variable are bound, the last
//! variable's current domain is intersected with the supported values.
//! Dead ends jump back to the latest variable involved in the conflict, which
//! skips only subtrees without solutions, so solutions still arrive in
//! lexicographic order.

use std::collections::HashMap;
use std::ops::ControlFlow;

use fixedbitset::FixedBitSet;

use crate::network::Network;
use crate::value::{Tuple, Value};

/// Node limit used when the caller does not supply one.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchStatus {
    /// The whole search space was explored.
    Completed,
    /// The visitor asked to stop.
    Stopped,
    BudgetExhausted,
}

enum Support {
    Binary(Vec<FixedBitSet>),
    General {
        prefix: Vec<usize>,
        table: HashMap<Box<[u32]>, FixedBitSet>,
    },
}

struct Check {
    target: usize,
    support: Support,
}

/// Index-level view of a network prepared for repeated searches.
pub struct SearchModel {
    domains: Vec<Vec<Value>>,
    index: Vec<HashMap<Value, u32>>,
    initial: Vec<FixedBitSet>,
    /// `checks[x]`: constraints whose second-to-last variable is `x`.
    checks: Vec<Vec<Check>>,
}

impl SearchModel {
    pub fn new(net: &Network) -> Self {
        let n = net.len();
        let domains: Vec<Vec<Value>> = net.domains().to_vec();
        let index: Vec<HashMap<Value, u32>> = domains
            .iter()
            .map(|d| {
                d.iter()
                    .enumerate()
                    .map(|(i, v)| (v.clone(), i as u32))
                    .collect()
            })
            .collect();
        let mut initial: Vec<FixedBitSet> = domains
            .iter()
            .map(|d| {
                let mut b = FixedBitSet::with_capacity(d.len());
                b.insert_range(..);
                b
            })
            .collect();
        let mut checks: Vec<Vec<Check>> = (0..n).map(|_| Vec::new()).collect();

        for rel in net.constraints() {
            let pos: Vec<usize> = rel.scope().ranks().map(|r| r as usize).collect();
            let idx_tuples = rel.tuples().iter().map(|t| {
                t.values()
                    .iter()
                    .zip(&pos)
                    .map(|(v, &p)| index[p][v])
                    .collect::<Vec<u32>>()
            });
            let arity = pos.len();
            let target = pos[arity - 1];
            let width = domains[target].len();
            if arity == 1 {
                let mut allowed = FixedBitSet::with_capacity(width);
                for t in idx_tuples {
                    allowed.insert(t[0] as usize);
                }
                initial[target].intersect_with(&allowed);
                continue;
            }
            let support = if arity == 2 {
                let mut rows = vec![FixedBitSet::with_capacity(width); domains[pos[0]].len()];
                for t in idx_tuples {
                    rows[t[0] as usize].insert(t[1] as usize);
                }
                Support::Binary(rows)
            } else {
                let mut table: HashMap<Box<[u32]>, FixedBitSet> = HashMap::new();
                for t in idx_tuples {
                    table
                        .entry(t[..arity - 1].into())
                        .or_insert_with(|| FixedBitSet::with_capacity(width))
                        .insert(t[arity - 1] as usize);
                }
                Support::General {
                    prefix: pos[..arity - 1].to_vec(),
                    table,
                }
            };
            checks[pos[arity - 2]].push(Check { target, support });
        }
        SearchModel {
            domains,
            index,
            initial,
            checks,
        }
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn domain(&self, var: usize) -> &[Value] {
        &self.domains[var]
    }

    pub fn value_index(&self, var: usize, value: &Value) -> Option<u32> {
        self.index[var].get(value).copied()
    }

    pub fn to_tuple(&self, assignment: &[u32]) -> Tuple {
        Tuple(
            assignment
                .iter()
                .enumerate()
                .map(|(var, &i)| self.domains[var][i as usize].clone())
                .collect(),
        )
    }

    /// Runs the search, handing every solution (as value indices) to `visit`.
    ///
    /// `pins` fixes variables to value indices. `budget` bounds the number of
    /// value assignments tried.
    pub fn search<F>(&self, pins: &[(usize, u32)], budget: u64, mut visit: F) -> SearchStatus
    where
        F: FnMut(&[u32]) -> ControlFlow<()>,
    {
        let n = self.domains.len();
        let mut dom = self.initial.clone();
        for &(var, val) in pins {
            let keep = dom[var].contains(val as usize);
            dom[var].clear();
            if keep {
                dom[var].insert(val as usize);
            }
        }
        if dom.iter().any(|d| d.is_clear()) {
            return SearchStatus::Completed;
        }
        if n == 0 {
            return match visit(&[]) {
                ControlFlow::Continue(()) => SearchStatus::Completed,
                ControlFlow::Break(()) => SearchStatus::Stopped,
            };
        }

        let mut assign = vec![0u32; n];
        let mut cursor = vec![0usize; n];
        let mut marks = vec![0usize; n];
        // `past[t]`: earlier variables whose assignment narrowed the domain of `t`.
        let mut past: Vec<Vec<usize>> = vec![Vec::new(); n];
        // `conflicts[d]`: earlier variables blamed for failures below depth `d`.
        let mut conflicts: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(n); n];
        let mut trail: Vec<(usize, FixedBitSet, usize)> = Vec::new();
        let mut key: Vec<u32> = Vec::new();
        let mut nodes = 0u64;
        let mut depth = 0usize;

        loop {
            while trail.len() > marks[depth] {
                let (var, old, len) = trail.pop().expect("trail entry");
                dom[var] = old;
                past[var].truncate(len);
            }
            let next = dom[depth].ones().find(|&i| i >= cursor[depth]);
            let Some(v) = next else {
                // Jump back to the latest variable involved in the failure.
                let mut blame = std::mem::replace(&mut conflicts[depth], FixedBitSet::with_capacity(n));
                blame.extend(past[depth].iter().copied());
                let Some(h) = blame.ones().last() else {
                    return SearchStatus::Completed;
                };
                blame.set(h, false);
                conflicts[h].union_with(&blame);
                depth = h;
                continue;
            };
            cursor[depth] = v + 1;
            nodes += 1;
            if nodes > budget {
                return SearchStatus::BudgetExhausted;
            }
            assign[depth] = v as u32;

            let mut consistent = true;
            for check in &self.checks[depth] {
                let (support, prefix) = match &check.support {
                    Support::Binary(rows) => (Some(&rows[v]), None),
                    Support::General { prefix, table } => {
                        key.clear();
                        key.extend(prefix.iter().map(|&p| assign[p]));
                        (table.get(key.as_slice()), Some(prefix))
                    }
                };
                let t = check.target;
                match support {
                    Some(s) if dom[t].is_subset(s) => continue,
                    Some(s) => {
                        let mut narrowed = dom[t].clone();
                        narrowed.intersect_with(s);
                        let empty = narrowed.is_clear();
                        trail.push((t, std::mem::replace(&mut dom[t], narrowed), past[t].len()));
                        match prefix {
                            Some(p) => past[t].extend(p.iter().copied()),
                            None => past[t].push(depth),
                        }
                        if empty {
                            conflicts[depth].extend(past[t].iter().copied());
                        } else {
                            continue;
                        }
                    }
                    None => {
                        conflicts[depth].extend(prefix.into_iter().flatten().copied());
                    }
                }
                conflicts[depth].set(depth, false);
                consistent = false;
                break;
            }
            if !consistent {
                continue;
            }
            if depth + 1 == n {
                if visit(&assign).is_break() {
                    return SearchStatus::Stopped;
                }
                // Keep enumerating: later backtracking must be chronological.
                conflicts[depth].insert_range(..depth);
                continue;
            }
            depth += 1;
            marks[depth] = trail.len();
            cursor[depth] = 0;
            conflicts[depth].clear();
        }
    }

    /// First solution extending `pins`, in canonical order.
    pub fn first(&self, pins: &[(usize, u32)], budget: u64) -> (Option<Vec<u32>>, SearchStatus) {
        let mut found = None;
        let status = self.search(pins, budget, |a| {
            found = Some(a.to_vec());
            ControlFlow::Break(())
        });
        (found, status)
    }
}
