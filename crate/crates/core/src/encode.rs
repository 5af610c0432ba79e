//! Direct clause encoding of a network, used for repeated extension checks.
//!
//! Each pair (variable, value) gets one boolean. Every variable takes exactly
//! one value. A binary constraint becomes support clauses in both directions;
//! a wider constraint gets one selector per tuple, at least one selector must
//! hold, and a selector forces the values of its tuple.
//!
//! Before each solve every variable gets a preferred value drawn from a
//! seeded generator, so consecutive solutions differ and cover many tuples.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::network::Network;
use crate::sat::{lit, Lit, SatOutcome, Solver};
use crate::search::SearchStatus;

pub struct NetworkSat {
    solver: Solver,
    offsets: Vec<usize>,
    widths: Vec<usize>,
    rng: ChaCha8Rng,
}

impl NetworkSat {
    pub fn new(net: &Network) -> Self {
        let widths: Vec<usize> = net.domains().iter().map(Vec::len).collect();
        let mut offsets = Vec::with_capacity(widths.len());
        let mut next = 0usize;
        for &w in &widths {
            offsets.push(next);
            next += w;
        }
        let at = |x: usize, a: usize| offsets[x] + a;
        let mut clauses: Vec<Vec<Lit>> = Vec::new();
        for (x, &w) in widths.iter().enumerate() {
            clauses.push((0..w).map(|a| lit(at(x, a), true)).collect());
            for a in 0..w {
                for b in a + 1..w {
                    clauses.push(vec![lit(at(x, a), false), lit(at(x, b), false)]);
                }
            }
        }
        for rel in net.constraints() {
            let pos: Vec<usize> = rel.scope().ranks().map(|r| r as usize).collect();
            let rows: Vec<Vec<usize>> = rel
                .tuples()
                .iter()
                .map(|t| {
                    t.values()
                        .iter()
                        .zip(&pos)
                        .map(|(v, &p)| {
                            net.domains()[p]
                                .binary_search(v)
                                .expect("constraint values lie in domains")
                        })
                        .collect()
                })
                .collect();
            match pos.len() {
                1 => {
                    let mut allowed = vec![false; widths[pos[0]]];
                    for r in &rows {
                        allowed[r[0]] = true;
                    }
                    for (a, ok) in allowed.into_iter().enumerate() {
                        if !ok {
                            clauses.push(vec![lit(at(pos[0], a), false)]);
                        }
                    }
                }
                2 => {
                    for (from, to) in [(0, 1), (1, 0)] {
                        let mut support = vec![Vec::new(); widths[pos[from]]];
                        for r in &rows {
                            support[r[from]].push(lit(at(pos[to], r[to]), true));
                        }
                        for (a, mut clause) in support.into_iter().enumerate() {
                            clause.push(lit(at(pos[from], a), false));
                            clauses.push(clause);
                        }
                    }
                }
                _ => {
                    let mut any = Vec::with_capacity(rows.len());
                    for r in &rows {
                        let sel = next;
                        next += 1;
                        any.push(lit(sel, true));
                        for (&p, &a) in pos.iter().zip(r) {
                            clauses.push(vec![lit(sel, false), lit(at(p, a), true)]);
                        }
                    }
                    clauses.push(any);
                }
            }
        }
        NetworkSat {
            solver: Solver::new(next, clauses),
            offsets,
            widths,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    /// A solution extending `pins` (variable, value index), as value indices.
    /// The status is `Stopped` when one was found and `Completed` when none
    /// exists. `budget` bounds solver decisions plus conflicts.
    pub fn extend(&mut self, pins: &[(usize, u32)], budget: u64) -> (Option<Vec<u32>>, SearchStatus) {
        let mut assumptions = Vec::with_capacity(pins.len());
        for &(x, a) in pins {
            if a as usize >= self.widths[x] {
                return (None, SearchStatus::Completed);
            }
            assumptions.push(lit(self.offsets[x] + a as usize, true));
        }
        for (&o, &w) in self.offsets.iter().zip(&self.widths) {
            if w > 0 {
                let preferred = self.rng.random_range(0..w);
                for a in 0..w {
                    self.solver.set_phase(o + a, a == preferred);
                }
            }
        }
        match self.solver.solve_with(&assumptions, budget) {
            SatOutcome::Sat(model) => {
                let values = self
                    .offsets
                    .iter()
                    .zip(&self.widths)
                    .map(|(&o, &w)| {
                        (0..w).find(|&a| model[o + a]).expect("exactly one value") as u32
                    })
                    .collect();
                (Some(values), SearchStatus::Stopped)
            }
            SatOutcome::Unsat => (None, SearchStatus::Completed),
            SatOutcome::BudgetExhausted => (None, SearchStatus::BudgetExhausted),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::Relation;
    use crate::search::SearchModel;
    use crate::value::{Tuple, Value};

    fn chain() -> Network {
        let dom = || (0..3).map(Value::from).collect::<Vec<_>>();
        let net = Network::new([("A", dom()), ("B", dom()), ("C", dom())]).unwrap();
        let ab = net.scope(&["A", "B"]).unwrap();
        let abc = net.scope(&["A", "B", "C"]).unwrap();
        let lt = Relation::new(ab, [Tuple::numbers(&[0, 1]), Tuple::numbers(&[1, 2])]).unwrap();
        let sum = Relation::new(
            abc,
            [Tuple::numbers(&[0, 1, 2]), Tuple::numbers(&[1, 2, 0]), Tuple::numbers(&[2, 2, 2])],
        )
        .unwrap();
        net.with_constraint(lt).unwrap().with_constraint(sum).unwrap()
    }

    #[test]
    fn agrees_with_search_on_every_pin() {
        let net = chain();
        let model = SearchModel::new(&net);
        let mut sat = NetworkSat::new(&net);
        for x in 0..3 {
            for a in 0..3u32 {
                let (want, _) = model.first(&[(x, a)], u64::MAX);
                let (got, status) = sat.extend(&[(x, a)], u64::MAX);
                assert_eq!(want.is_some(), got.is_some(), "pin {x}={a}");
                if let Some(g) = got {
                    assert_eq!(status, SearchStatus::Stopped);
                    assert_eq!(g[x], a);
                    assert!(net.is_solution(&model.to_tuple(&g)));
                }
            }
        }
    }

    #[test]
    fn out_of_range_pin_has_no_extension() {
        let mut sat = NetworkSat::new(&chain());
        assert_eq!(sat.extend(&[(0, 7)], 10).0, None);
    }
}
