use crate::cnf::{Cnf, Literal};
use crate::error::{Error, Result};
use crate::network::{combinations, Network};
use crate::relation::Relation;
use crate::value::{Scope, Tuple, Value};

/// One variable `K<i>` per clause whose domain is the clause's literals
/// (`p` or `-p`). For every set of 2..=k clauses there is a constraint
/// allowing exactly the literal choices without a complementary pair, and
/// every variable has a unary constraint equal to its domain. The network is
/// solvable iff the formula is satisfiable.
pub fn sat_to_network(cnf: &Cnf, k: usize) -> Result<Network> {
    if k < 2 {
        return Err(Error::Parameter("k must be at least 2".into()));
    }
    if cnf.len() < 2 {
        return Err(Error::Input("the formula needs at least two clauses".into()));
    }
    let lits: Vec<&[Literal]> = cnf.clauses().iter().map(|c| c.literals()).collect();
    let mut net = Network::new(lits.iter().enumerate().map(|(i, ls)| {
        (
            format!("K{}", i + 1),
            ls.iter().map(|l| Value::sym(&l.to_string())).collect::<Vec<_>>(),
        )
    }))?;
    let vars = net.variables().to_vec();
    for (i, v) in vars.iter().enumerate() {
        let scope = Scope::new(vec![v.clone()])?;
        let rows = lits[i].iter().map(|l| Tuple(vec![Value::sym(&l.to_string())]));
        net.add_constraint(Relation::new(scope, rows)?)?;
    }
    for size in 2..=k.min(vars.len()) {
        for combo in combinations(vars.len(), size) {
            let scope = Scope::new(combo.iter().map(|&i| vars[i].clone()).collect())?;
            let mut rows = Vec::new();
            let mut chosen: Vec<&Literal> = Vec::with_capacity(size);
            consistent_choices(&combo, &lits, &mut chosen, &mut rows);
            net.add_constraint(Relation::new(scope, rows)?)?;
        }
    }
    Ok(net)
}

fn consistent_choices<'a>(
    combo: &[usize],
    lits: &[&'a [Literal]],
    chosen: &mut Vec<&'a Literal>,
    out: &mut Vec<Tuple>,
) {
    let depth = chosen.len();
    if depth == combo.len() {
        out.push(Tuple(chosen.iter().map(|l| Value::sym(&l.to_string())).collect()));
        return;
    }
    for l in lits[combo[depth]] {
        if chosen.iter().any(|c| c.is_complement_of(l)) {
            continue;
        }
        chosen.push(l);
        consistent_choices(combo, lits, chosen, out);
        chosen.pop();
    }
}
