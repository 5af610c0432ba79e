use std::collections::BTreeSet;

use crate::cnf::Cnf;
use crate::error::{Error, Result};
use crate::network::combinations;
use crate::relation::Relation;
use crate::value::{Scope, Tuple, Value, VariableId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BivaluedParams {
    pub m: usize,
    pub n: usize,
    /// Eight tuples for each 3-set of atoms that is not the atom set of a clause.
    pub r0: usize,
    pub r: usize,
}

impl BivaluedParams {
    /// Number of the tuple for clause `h` and satisfying assignment `j` (both 1-based).
    pub fn s(&self, h: usize, j: usize) -> usize {
        7 * (h - 1) + j
    }
}

/// Bi-valued relation over blocks X{i}^0..X{i}^r, one block per atom. Block
/// values either repeat a truth value or spell the tuple number `s` as
/// `s` zeros followed by ones. The relation is 3-decomposable iff the
/// formula is unsatisfiable.
///
/// Clause assignments and auxiliary assignments are enumerated in binary
/// order with the lowest-numbered atom as the most significant bit. With
/// exactly three atoms no block carries an identifier, so coinciding tuples
/// collapse and `|rho|` can be below `r`.
pub fn bivalued_construction(cnf: &Cnf) -> Result<(Relation, BivaluedParams)> {
    if cnf.is_empty() {
        return Err(Error::Input("the formula has no clauses".into()));
    }
    let index = cnf.atom_index();
    let mut clause_atoms = Vec::with_capacity(cnf.len());
    for c in cnf.clauses() {
        if c.len() != 3 || c.atom_count() != 3 {
            return Err(Error::Input(format!(
                "clause {c} must have exactly three literals over distinct atoms"
            )));
        }
        let mut lits: Vec<(usize, bool)> = c
            .literals()
            .iter()
            .map(|l| (index[l.atom()], l.is_positive()))
            .collect();
        lits.sort();
        clause_atoms.push(lits);
    }
    let n = cnf.atom_count();
    let m = cnf.len();
    let used: BTreeSet<Vec<usize>> = clause_atoms
        .iter()
        .map(|ls| ls.iter().map(|l| l.0).collect())
        .collect();
    let aux_sets: Vec<Vec<usize>> = combinations(n, 3).filter(|s| !used.contains(s)).collect();
    let r0 = 8 * aux_sets.len();
    let params = BivaluedParams { m, n, r0, r: 7 * m + r0 };
    let r = params.r;

    let atoms: Vec<&str> = cnf.atoms().collect();
    let mut vars = Vec::with_capacity(n * (r + 1));
    for (i, _) in atoms.iter().enumerate() {
        for j in 0..=r {
            vars.push(VariableId::new(&format!("X{}^{}", i + 1, j), vars.len() as u32));
        }
    }
    let scope = Scope::new(vars)?;

    let tuple = |s: usize, fixed: &[(usize, bool)]| {
        let mut t = Vec::with_capacity(n * (r + 1));
        for i in 0..n {
            match fixed.iter().find(|f| f.0 == i) {
                Some(&(_, b)) => t.extend(std::iter::repeat_n(Value::Number(b as i64), r + 1)),
                None => t.extend((0..=r).map(|j| Value::Number((j >= s) as i64))),
            }
        }
        Tuple(t)
    };

    let mut tuples = Vec::with_capacity(r);
    for (h, lits) in clause_atoms.iter().enumerate() {
        let mut j = 0;
        for bits in 0..8u32 {
            let assign: Vec<(usize, bool)> = lits
                .iter()
                .enumerate()
                .map(|(pos, &(a, _))| (a, bits >> (2 - pos) & 1 == 1))
                .collect();
            if !assign.iter().zip(lits).any(|(x, l)| x.1 == l.1) {
                continue;
            }
            j += 1;
            tuples.push(tuple(params.s(h + 1, j), &assign));
        }
    }
    for (idx, set) in aux_sets.iter().enumerate() {
        for bits in 0..8u32 {
            let assign: Vec<(usize, bool)> = set
                .iter()
                .enumerate()
                .map(|(pos, &a)| (a, bits >> (2 - pos) & 1 == 1))
                .collect();
            tuples.push(tuple(7 * m + 8 * idx + bits as usize + 1, &assign));
        }
    }
    Ok((Relation::new(scope, tuples)?, params))
}
