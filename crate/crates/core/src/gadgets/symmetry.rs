use std::collections::HashSet;

use crate::cnf::{Clause, Cnf, Literal};
use crate::error::{Error, Result};
use crate::network::combinations;

/// For each original atom (in atom order), its 2k+1 fresh atoms `p#1..p#(2k+1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionMap(pub Vec<(String, Vec<String>)>);

impl ExpansionMap {
    pub fn fresh(&self, atom: &str) -> Option<&[String]> {
        self.0.iter().find(|(a, _)| a == atom).map(|(_, v)| v.as_slice())
    }
}

/// Replaces every literal by each disjunction of k+1 same-sign literals over
/// the fresh atoms of its atom, taking all combinations per clause.
///
/// Clauses are expanded in input order; within a clause, the choice for the
/// first literal varies slowest and the (k+1)-subsets of fresh atoms come in
/// lexicographic order. Repeated clauses are dropped after their first
/// occurrence. Tautological input clauses are always satisfied and are
/// dropped.
pub fn symmetry_transform(cnf: &Cnf, k: usize) -> Result<(Cnf, ExpansionMap)> {
    if k < 1 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if let Some(c) = cnf.clauses().iter().find(|c| c.len() > 3) {
        return Err(Error::Input(format!("clause {c} has more than 3 literals")));
    }
    if let Some(a) = cnf.atoms().find(|a| a.contains('#')) {
        return Err(Error::Input(format!("atom {a} uses the reserved character '#'")));
    }
    let width = 2 * k + 1;
    let map = ExpansionMap(
        cnf.atoms()
            .map(|a| (a.to_string(), (1..=width).map(|i| format!("{a}#{i}")).collect()))
            .collect(),
    );
    let subsets: Vec<Vec<usize>> = combinations(width, k + 1).collect();

    let mut seen: HashSet<Clause> = HashSet::new();
    let mut out: Vec<Clause> = Vec::new();
    for clause in cnf.clauses() {
        if clause.is_tautology() {
            continue;
        }
        let options: Vec<Vec<Vec<Literal>>> = clause
            .literals()
            .iter()
            .map(|l| {
                let fresh = map.fresh(l.atom()).expect("atom has fresh copies");
                subsets
                    .iter()
                    .map(|s| {
                        s.iter()
                            .map(|&i| Literal::new(&fresh[i], l.is_positive()).expect("fresh atom"))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut odo = vec![0usize; options.len()];
        loop {
            let lits = odo
                .iter()
                .enumerate()
                .flat_map(|(i, &o)| options[i][o].iter().cloned());
            let c = Clause::new(lits);
            if seen.insert(c.clone()) {
                out.push(c);
            }
            let mut i = odo.len();
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                odo[i] += 1;
                if odo[i] < options[i].len() {
                    break;
                }
                odo[i] = 0;
            }
            if odo.iter().all(|&o| o == 0) {
                break;
            }
        }
    }
    Ok((Cnf::new(out), map))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_counts() {
        let c = Cnf::parse(&[&["p", "-q", "r"], &["-p", "-q"], &["q"]]).unwrap();
        let (t, map) = symmetry_transform(&c, 2).unwrap();
        assert_eq!(t.len(), 1110);
        assert_eq!(t.atom_count(), 15);
        assert_eq!(map.fresh("q").unwrap(), ["q#1", "q#2", "q#3", "q#4", "q#5"]);
        assert!(t.clauses().iter().all(|c| c.literals().iter().all(|l| l.atom().contains('#'))));
        assert_eq!(t.clauses()[0].to_string(), "(p#1 | p#2 | p#3 | -q#1 | -q#2 | -q#3 | r#1 | r#2 | r#3)");
    }

    #[test]
    fn edge_cases() {
        let (t, _) = symmetry_transform(&Cnf::default(), 2).unwrap();
        assert!(t.is_empty());
        let wide = Cnf::parse(&[&["a", "b", "c", "d"]]).unwrap();
        assert!(matches!(symmetry_transform(&wide, 1), Err(Error::Input(_))));
        let reserved = Cnf::parse(&[&["a#1"]]).unwrap();
        assert!(symmetry_transform(&reserved, 1).is_err());
        let (t, _) = symmetry_transform(&Cnf::parse(&[&["p"], &["p"]]).unwrap(), 1).unwrap();
        assert_eq!(t.len(), 3);
    }
}
