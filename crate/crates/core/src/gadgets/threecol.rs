use super::Graph;
use crate::error::{Error, Result};
use crate::network::{combinations, Network};
use crate::relation::Relation;
use crate::value::{Scope, Tuple, Value};

pub(crate) const COLORS: [&str; 3] = ["b", "g", "r"];

fn check(g: &Graph, k: usize) -> Result<()> {
    if g.vertex_count() < 3 {
        return Err(Error::Input("the graph needs at least three vertices".into()));
    }
    if k < 2 || k > g.vertex_count() {
        return Err(Error::Parameter(format!(
            "k must lie in 2..={}",
            g.vertex_count()
        )));
    }
    Ok(())
}

/// Colorings of the vertices in `combo` (0-based) that are proper on every
/// edge inside it, in canonical tuple order.
fn proper_colorings(g: &Graph, combo: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; combo.len()];
    loop {
        let ok = (0..combo.len()).all(|a| {
            (a + 1..combo.len())
                .all(|b| cur[a] != cur[b] || !g.has_edge(combo[a] + 1, combo[b] + 1))
        });
        if ok {
            out.push(cur.clone());
        }
        let mut i = combo.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < 3 {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Variables X1..Xn over {b, g, r} with one constraint per k-set of vertices
/// holding the colorings proper on the edges inside the set.
pub fn threecol_network(g: &Graph, k: usize) -> Result<Network> {
    check(g, k)?;
    let n = g.vertex_count();
    let colors: Vec<Value> = COLORS.iter().map(|c| Value::sym(c)).collect();
    let mut net = Network::new((1..=n).map(|i| (format!("X{i}"), colors.clone())))?;
    let vars = net.variables().to_vec();
    for combo in combinations(n, k) {
        let scope = Scope::new(combo.iter().map(|&i| vars[i].clone()).collect())?;
        let rows = proper_colorings(g, &combo)
            .into_iter()
            .map(|c| Tuple(c.into_iter().map(|x| colors[x].clone()).collect()));
        net.add_constraint(Relation::new(scope, rows)?)?;
    }
    Ok(net)
}

/// Rows of the k-ary coloring network numbered 1.. in scope order, then
/// canonical tuple order: (vertex set, color index per member).
pub(crate) fn numbered_rows(g: &Graph, k: usize) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    check(g, k)?;
    if k >= g.vertex_count() {
        return Err(Error::Parameter(
            "k must be smaller than the vertex count so every row carries an identifier".into(),
        ));
    }
    let mut rows = Vec::new();
    for combo in combinations(g.vertex_count(), k) {
        for c in proper_colorings(g, &combo) {
            rows.push((combo.clone(), c));
        }
    }
    Ok(rows)
}

/// A single relation over X1..Xn. Row `d` of the coloring network becomes a
/// tuple carrying the row's colors inside its scope and the fresh value
/// `d#<d>` everywhere else. It is k-decomposable iff the graph is not
/// 3-colorable.
pub fn threecol_to_constraint(g: &Graph, k: usize) -> Result<Relation> {
    let rows = numbered_rows(g, k)?;
    let n = g.vertex_count();
    let scope = Scope::new(
        (0..n)
            .map(|i| crate::value::VariableId::new(&format!("X{}", i + 1), i as u32))
            .collect(),
    )?;
    let tuples = rows.iter().enumerate().map(|(d, (combo, colors))| {
        let id = Value::sym(&format!("d#{}", d + 1));
        let mut t = vec![id; n];
        for (&v, &c) in combo.iter().zip(colors) {
            t[v] = Value::sym(COLORS[c]);
        }
        Tuple(t)
    });
    Relation::new(scope, tuples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::solve_all;

    #[test]
    fn coloring_networks() {
        let k3 = threecol_network(&Graph::complete(3), 2).unwrap();
        assert!(k3.constraints().all(|r| r.len() == 6));
        assert_eq!(solve_all(&k3).unwrap().len(), 6);
        let empty = threecol_network(&Graph::new(4, []).unwrap(), 2).unwrap();
        assert!(empty.constraints().all(|r| r.len() == 9));
        assert_eq!(solve_all(&empty).unwrap().len(), 81);
        let k4 = threecol_network(&Graph::complete(4), 2).unwrap();
        assert!(solve_all(&k4).unwrap().is_empty());
        assert!(threecol_network(&Graph::complete(2), 2).is_err());
    }

    #[test]
    fn identifier_relation_sizes() {
        let rho = threecol_to_constraint(&Graph::complete(3), 2).unwrap();
        assert_eq!(rho.len(), 18);
        assert_eq!(rho.distinct_values().len(), 21);
        assert!(rho.contains_values(&[Value::sym("b"), Value::sym("g"), Value::sym("d#1")]));
        assert_eq!(threecol_to_constraint(&Graph::complete(4), 2).unwrap().len(), 36);
        assert_eq!(threecol_to_constraint(&Graph::cycle(5), 2).unwrap().len(), 75);
        let k4e = Graph::complete(4).without_edge(1, 2);
        assert_eq!(threecol_to_constraint(&k4e, 2).unwrap().len(), 39);
        assert!(threecol_to_constraint(&Graph::complete(3), 3).is_err());
    }
}
