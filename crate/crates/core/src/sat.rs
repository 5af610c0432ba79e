//! A small conflict-driven SAT solver.
//!
//! Literals are `2 * var + negated`. Decisions pick the most active variable
//! (ties to the lowest index) in its last phase, false at first. Restarts
//! follow the Luby sequence and learnt clauses with a high literal block
//! distance are dropped periodically. Nothing is random, so every run is
//! deterministic. Learnt clauses are kept across calls, which is sound
//! because they are implied by the original clauses alone.

use crate::cnf::Cnf;

pub type Lit = u32;

pub fn lit(var: usize, positive: bool) -> Lit {
    2 * var as u32 + u32::from(!positive)
}

fn var_of(l: Lit) -> usize {
    (l >> 1) as usize
}

const FALSE: u8 = 0;
const TRUE: u8 = 1;
const UNDEF: u8 = 2;
const NOT_IN_HEAP: usize = usize::MAX;
const RESTART_UNIT: u64 = 100;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatOutcome {
    Sat(Vec<bool>),
    Unsat,
    BudgetExhausted,
}

pub struct Solver {
    assign: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    seen: Vec<bool>,
    clauses: Vec<Vec<Lit>>,
    /// Learnt clauses carry their literal block distance, originals `None`.
    lbd: Vec<Option<u32>>,
    learnts: usize,
    max_learnts: usize,
    watches: Vec<Vec<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    units: Vec<Lit>,
    unsat: bool,
    activity: Vec<f64>,
    var_inc: f64,
    heap: Vec<usize>,
    heap_pos: Vec<usize>,
    phase: Vec<bool>,
    restarts: u64,
}

/// The `i`-th element (from 0) of the Luby sequence 1 1 2 1 1 2 4 ...
fn luby(mut i: u64) -> u64 {
    let (mut size, mut seq) = (1u64, 0u32);
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

impl Solver {
    pub fn new(num_vars: usize, clauses: impl IntoIterator<Item = Vec<Lit>>) -> Self {
        let mut s = Solver {
            assign: vec![UNDEF; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            seen: vec![false; num_vars],
            clauses: Vec::new(),
            lbd: Vec::new(),
            learnts: 0,
            max_learnts: 0,
            watches: vec![Vec::new(); 2 * num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            units: Vec::new(),
            unsat: false,
            activity: vec![0.0; num_vars],
            var_inc: 1.0,
            heap: (0..num_vars).collect(),
            heap_pos: (0..num_vars).collect(),
            phase: vec![false; num_vars],
            restarts: 0,
        };
        for mut c in clauses {
            c.sort_unstable();
            c.dedup();
            if c.windows(2).any(|w| w[0] ^ 1 == w[1]) {
                continue;
            }
            match c.len() {
                0 => s.unsat = true,
                1 => s.units.push(c[0]),
                _ => {
                    s.attach(c, None);
                }
            }
        }
        s.max_learnts = (s.clauses.len() / 3).max(2000);
        s
    }

    pub fn from_cnf(cnf: &Cnf) -> Self {
        Solver::new(cnf.atom_count(), cnf.encode())
    }

    pub fn num_vars(&self) -> usize {
        self.assign.len()
    }

    /// Sets the phase the next decision on `var` will try.
    pub fn set_phase(&mut self, var: usize, positive: bool) {
        self.phase[var] = positive;
    }

    fn attach(&mut self, c: Vec<Lit>, lbd: Option<u32>) -> u32 {
        let ci = self.clauses.len() as u32;
        self.watches[c[0] as usize].push(ci);
        self.watches[c[1] as usize].push(ci);
        self.clauses.push(c);
        self.lbd.push(lbd);
        if lbd.is_some() {
            self.learnts += 1;
        }
        ci
    }

    fn value(&self, l: Lit) -> u8 {
        let a = self.assign[var_of(l)];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ (l & 1) as u8
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = var_of(l);
        self.assign[v] = if l & 1 == 0 { TRUE } else { FALSE };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let keep = self.trail_lim[lvl];
        for i in keep..self.trail.len() {
            let v = var_of(self.trail[i]);
            self.phase[v] = self.assign[v] == TRUE;
            self.assign[v] = UNDEF;
            self.reason[v] = None;
            self.heap_insert(v);
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(lvl);
        self.qhead = keep;
    }

    fn before(&self, a: usize, b: usize) -> bool {
        let (x, y) = (self.activity[a], self.activity[b]);
        x > y || (x == y && a < b)
    }

    fn heap_up(&mut self, mut i: usize) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !self.before(v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.heap_pos[self.heap[i]] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.heap_pos[v] = i;
    }

    fn heap_down(&mut self, mut i: usize) {
        let v = self.heap[i];
        loop {
            let left = 2 * i + 1;
            if left >= self.heap.len() {
                break;
            }
            let right = left + 1;
            let child = if right < self.heap.len() && self.before(self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            if !self.before(self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.heap_pos[self.heap[i]] = i;
            i = child;
        }
        self.heap[i] = v;
        self.heap_pos[v] = i;
    }

    fn heap_insert(&mut self, v: usize) {
        if self.heap_pos[v] == NOT_IN_HEAP {
            self.heap.push(v);
            let i = self.heap.len() - 1;
            self.heap_pos[v] = i;
            self.heap_up(i);
        }
    }

    fn heap_pop(&mut self) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty heap");
        self.heap_pos[top] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.heap_pos[last] = 0;
            self.heap_down(0);
        }
        Some(top)
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        if self.heap_pos[v] != NOT_IN_HEAP {
            self.heap_up(self.heap_pos[v]);
        }
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = &mut self.clauses[ci as usize];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                let a = self.assign[var_of(first)];
                if a != UNDEF && a ^ (first & 1) as u8 == TRUE {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for kk in 2..c.len() {
                    let l = c[kk];
                    let a = self.assign[var_of(l)];
                    if a == UNDEF || a ^ (l & 1) as u8 == TRUE {
                        c.swap(1, kk);
                        self.watches[l as usize].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = ci;
                j += 1;
                if a != UNDEF {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(ci));
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first, highest remaining level second) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, usize) {
        let current = self.decision_level() as u32;
        let mut learnt: Vec<Lit> = vec![0];
        let mut pending = 0usize;
        let mut idx = self.trail.len();
        let mut first = true;
        loop {
            let len = self.clauses[confl as usize].len();
            for k in usize::from(!first)..len {
                let q = self.clauses[confl as usize][k];
                let v = var_of(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] == current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            first = false;
            let p = loop {
                idx -= 1;
                let l = self.trail[idx];
                if self.seen[var_of(l)] {
                    break l;
                }
            };
            self.seen[var_of(p)] = false;
            pending -= 1;
            if pending == 0 {
                learnt[0] = p ^ 1;
                break;
            }
            confl = self.reason[var_of(p)].expect("implied literal has a reason");
        }
        for &l in &learnt[1..] {
            self.seen[var_of(l)] = false;
        }
        self.var_inc /= 0.95;
        let mut back = 0usize;
        if learnt.len() > 1 {
            let mut best = 1;
            for i in 2..learnt.len() {
                if self.level[var_of(learnt[i])] > self.level[var_of(learnt[best])] {
                    best = i;
                }
            }
            learnt.swap(1, best);
            back = self.level[var_of(learnt[1])] as usize;
        }
        (learnt, back)
    }

    fn block_distance(&self, c: &[Lit]) -> u32 {
        let mut levels: Vec<u32> = c.iter().map(|&l| self.level[var_of(l)]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    /// Drops the less useful half of the learnt clauses. Only called at
    /// level 0, where no remaining reason is ever consulted again.
    fn reduce_learnts(&mut self) {
        let mut ranked: Vec<(u32, usize)> = self
            .lbd
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.filter(|&d| d > 2).map(|d| (d, i)))
            .collect();
        ranked.sort_unstable_by(|a, b| b.cmp(a));
        let mut drop = vec![false; self.clauses.len()];
        for &(_, i) in &ranked[..ranked.len() / 2] {
            drop[i] = true;
        }
        let clauses = std::mem::take(&mut self.clauses);
        let lbd = std::mem::take(&mut self.lbd);
        for w in &mut self.watches {
            w.clear();
        }
        self.learnts = 0;
        for ((c, l), d) in clauses.into_iter().zip(lbd).zip(drop) {
            if !d {
                self.attach(c, l);
            }
        }
        for r in &mut self.reason {
            *r = None;
        }
        self.max_learnts += self.max_learnts / 10;
    }

    pub fn solve(&mut self, budget: u64) -> SatOutcome {
        self.solve_with(&[], budget)
    }

    /// Decides satisfiability under `assumptions`. `budget` bounds the number
    /// of decisions plus conflicts.
    pub fn solve_with(&mut self, assumptions: &[Lit], budget: u64) -> SatOutcome {
        if self.unsat {
            return SatOutcome::Unsat;
        }
        self.cancel_until(0);
        for l in std::mem::take(&mut self.units) {
            match self.value(l) {
                TRUE => {}
                FALSE => {
                    self.unsat = true;
                    return SatOutcome::Unsat;
                }
                _ => self.enqueue(l, None),
            }
        }
        let mut work = 0u64;
        let mut conflicts = 0u64;
        let mut limit = luby(self.restarts) * RESTART_UNIT;
        loop {
            if let Some(confl) = self.propagate() {
                if self.decision_level() == 0 {
                    self.unsat = true;
                    return SatOutcome::Unsat;
                }
                work += 1;
                conflicts += 1;
                let (learnt, back) = self.analyze(confl);
                self.cancel_until(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let d = self.block_distance(&learnt);
                    let ci = self.attach(learnt, Some(d));
                    self.enqueue(asserting, Some(ci));
                }
                if work > budget {
                    self.cancel_until(0);
                    return SatOutcome::BudgetExhausted;
                }
                continue;
            }
            if conflicts >= limit {
                conflicts = 0;
                self.restarts += 1;
                limit = luby(self.restarts) * RESTART_UNIT;
                self.cancel_until(0);
                if self.learnts > self.max_learnts {
                    self.reduce_learnts();
                }
                continue;
            }
            let dl = self.decision_level();
            if dl < assumptions.len() {
                let a = assumptions[dl];
                match self.value(a) {
                    TRUE => self.trail_lim.push(self.trail.len()),
                    FALSE => {
                        self.cancel_until(0);
                        return SatOutcome::Unsat;
                    }
                    _ => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(a, None);
                    }
                }
                continue;
            }
            let next = loop {
                match self.heap_pop() {
                    Some(v) if self.assign[v] != UNDEF => continue,
                    other => break other,
                }
            };
            let Some(v) = next else {
                let model = self.assign.iter().map(|&a| a == TRUE).collect();
                self.cancel_until(0);
                return SatOutcome::Sat(model);
            };
            work += 1;
            if work > budget {
                self.heap_insert(v);
                self.cancel_until(0);
                return SatOutcome::BudgetExhausted;
            }
            self.trail_lim.push(self.trail.len());
            self.enqueue(lit(v, self.phase[v]), None);
        }
    }
}

/// Satisfiability of a formula, with a satisfying assignment over `cnf.atoms()`.
pub fn solve_cnf(cnf: &Cnf, budget: u64) -> SatOutcome {
    Solver::from_cnf(cnf).solve(budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(n: usize, clauses: &[Vec<Lit>]) -> bool {
        (0..1u32 << n).any(|m| {
            clauses.iter().all(|c| {
                c.iter()
                    .any(|&l| ((m >> var_of(l)) & 1 == 1) == (l & 1 == 0))
            })
        })
    }

    #[test]
    fn luby_prefix() {
        let got: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(got, [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        // p(i,h) = pigeon i in hole h, var 2*i + h
        let mut clauses = Vec::new();
        for i in 0..3 {
            clauses.push(vec![lit(2 * i, true), lit(2 * i + 1, true)]);
        }
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    clauses.push(vec![lit(2 * i + h, false), lit(2 * j + h, false)]);
                }
            }
        }
        assert_eq!(Solver::new(6, clauses).solve(u64::MAX), SatOutcome::Unsat);
    }

    #[test]
    fn pigeonhole_seven_into_six_needs_restarts_and_is_unsat() {
        let (pigeons, holes) = (7, 6);
        let var = |i: usize, h: usize| i * holes + h;
        let mut clauses = Vec::new();
        for i in 0..pigeons {
            clauses.push((0..holes).map(|h| lit(var(i, h), true)).collect());
        }
        for h in 0..holes {
            for i in 0..pigeons {
                for j in i + 1..pigeons {
                    clauses.push(vec![lit(var(i, h), false), lit(var(j, h), false)]);
                }
            }
        }
        let mut s = Solver::new(pigeons * holes, clauses);
        assert_eq!(s.solve(u64::MAX), SatOutcome::Unsat);
        assert!(s.restarts > 0);
    }

    #[test]
    fn assumptions_and_reuse() {
        let clauses = vec![
            vec![lit(0, true), lit(1, true)],
            vec![lit(0, false), lit(2, true)],
        ];
        let mut s = Solver::new(3, clauses);
        assert_eq!(
            s.solve_with(&[lit(0, false), lit(1, false)], 100),
            SatOutcome::Unsat
        );
        match s.solve_with(&[lit(0, true)], 100) {
            SatOutcome::Sat(m) => assert!(m[0] && m[2]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(s.solve(100), SatOutcome::Sat(_)));
    }

    #[test]
    fn agrees_with_enumeration_on_small_formulas() {
        // Deterministic pseudo-random 3-clauses over 6 variables.
        let mut x: u64 = 0x9e3779b97f4a7c15;
        let mut next = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            x
        };
        for _ in 0..300 {
            let m = (next() % 30) as usize;
            let clauses: Vec<Vec<Lit>> = (0..m)
                .map(|_| (0..3).map(|_| (next() % 12) as Lit).collect())
                .collect();
            let expected = brute(6, &clauses);
            match Solver::new(6, clauses.clone()).solve(u64::MAX) {
                SatOutcome::Sat(model) => {
                    assert!(expected);
                    assert!(clauses
                        .iter()
                        .all(|c| c.iter().any(|&l| model[var_of(l)] == (l & 1 == 0))));
                }
                SatOutcome::Unsat => assert!(!expected),
                SatOutcome::BudgetExhausted => unreachable!(),
            }
        }
    }
}
