//! Propositional CNF formulas.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    atom: Arc<str>,
    negated: bool,
}

impl Literal {
    pub fn new(atom: &str, positive: bool) -> Result<Self> {
        if atom.is_empty() || atom.starts_with('-') {
            return Err(Error::Input(format!("invalid atom name {atom:?}")));
        }
        Ok(Literal {
            atom: atom.into(),
            negated: !positive,
        })
    }

    pub fn pos(atom: &str) -> Self {
        Literal::new(atom, true).expect("valid atom")
    }

    pub fn neg(atom: &str) -> Self {
        Literal::new(atom, false).expect("valid atom")
    }

    /// Parses `p` or `-p`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.strip_prefix('-') {
            Some(a) => Literal::new(a, false),
            None => Literal::new(s, true),
        }
    }

    pub fn atom(&self) -> &str {
        &self.atom
    }

    pub fn is_positive(&self) -> bool {
        !self.negated
    }

    pub fn complement(&self) -> Literal {
        Literal {
            atom: self.atom.clone(),
            negated: !self.negated,
        }
    }

    pub fn is_complement_of(&self, other: &Literal) -> bool {
        self.atom == other.atom && self.negated != other.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-{}", self.atom)
        } else {
            f.write_str(&self.atom)
        }
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A duplicate-free, canonically sorted disjunction of literals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Clause(Vec<Literal>);

impl Clause {
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Self {
        let mut v: Vec<Literal> = lits.into_iter().collect();
        v.sort();
        v.dedup();
        Clause(v)
    }

    pub fn parse(lits: &[&str]) -> Result<Self> {
        Ok(Clause::new(
            lits.iter()
                .map(|s| Literal::parse(s))
                .collect::<Result<Vec<_>>>()?,
        ))
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_tautology(&self) -> bool {
        self.0.windows(2).any(|w| w[0].is_complement_of(&w[1]))
    }

    /// Number of distinct atoms.
    pub fn atom_count(&self) -> usize {
        let mut atoms: Vec<&str> = self.0.iter().map(Literal::atom).collect();
        atoms.dedup();
        atoms.len()
    }

    pub fn satisfied_by(&self, value: impl Fn(&str) -> bool) -> bool {
        self.0.iter().any(|l| value(l.atom()) == l.is_positive())
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Conjunction of clauses. Atoms are ordered by first occurrence.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Cnf {
    clauses: Vec<Clause>,
    atoms: Vec<Arc<str>>,
}

impl Cnf {
    pub fn new(clauses: Vec<Clause>) -> Self {
        let mut atoms: Vec<Arc<str>> = Vec::new();
        let mut seen: HashMap<Arc<str>, ()> = HashMap::new();
        for c in &clauses {
            for l in c.literals() {
                if seen.insert(l.atom.clone(), ()).is_none() {
                    atoms.push(l.atom.clone());
                }
            }
        }
        Cnf { clauses, atoms }
    }

    /// Builds a formula from literal strings, e.g. `&[&["p", "-q"], &["q"]]`.
    pub fn parse(clauses: &[&[&str]]) -> Result<Self> {
        Ok(Cnf::new(
            clauses
                .iter()
                .map(|c| Clause::parse(c))
                .collect::<Result<Vec<_>>>()?,
        ))
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.atoms.iter().map(|a| &**a)
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_index(&self) -> HashMap<&str, usize> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (&**a, i))
            .collect()
    }

    /// Evaluates the formula under a total assignment indexed like `atoms()`.
    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        let idx = self.atom_index();
        self.clauses
            .iter()
            .all(|c| c.satisfied_by(|a| assignment[idx[a]]))
    }

    /// Clauses as solver literals (`2 * atom + negated`).
    pub fn encode(&self) -> Vec<Vec<u32>> {
        let idx = self.atom_index();
        self.clauses
            .iter()
            .map(|c| {
                c.literals()
                    .iter()
                    .map(|l| 2 * idx[l.atom()] as u32 + u32::from(!l.is_positive()))
                    .collect()
            })
            .collect()
    }
}

impl fmt::Debug for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.clauses).finish()
    }
}
