use super::threecol::numbered_rows;
use super::Graph;
use crate::error::Result;
use crate::relation::Relation;
use crate::value::{Scope, Tuple, Value, VariableId};

/// Tri-valued relation replacing each vertex by a block of s+1 variables,
/// where s is the number of rows of the binary coloring network. Inside a
/// row's scope the block encodes the color (r..r, g..g, or b followed by r's);
/// elsewhere it is the identifier r..r b g..g with b at position d. It is
/// 2-decomposable iff the graph is not 3-colorable.
pub fn trivalued_construction(g: &Graph) -> Result<Relation> {
    let rows = numbered_rows(g, 2)?;
    let s = rows.len();
    let n = g.vertex_count();
    let w = s + 1;
    let mut vars = Vec::with_capacity(n * w);
    for i in 1..=n {
        for j in 0..w {
            vars.push(VariableId::new(&format!("X{i}^{j}"), vars.len() as u32));
        }
    }
    let scope = Scope::new(vars)?;
    let (r, gr, b) = (Value::sym("r"), Value::sym("g"), Value::sym("b"));
    let tuples = rows.iter().enumerate().map(|(idx, (combo, colors))| {
        let d = idx + 1;
        let mut t = Vec::with_capacity(n * w);
        for v in 0..n {
            match combo.iter().position(|&x| x == v) {
                Some(p) => match super::threecol::COLORS[colors[p]] {
                    "r" => t.extend(std::iter::repeat_n(r.clone(), w)),
                    "g" => t.extend(std::iter::repeat_n(gr.clone(), w)),
                    _ => {
                        t.push(b.clone());
                        t.extend(std::iter::repeat_n(r.clone(), s));
                    }
                },
                None => t.extend((0..w).map(|j| match j.cmp(&d) {
                    std::cmp::Ordering::Less => r.clone(),
                    std::cmp::Ordering::Equal => b.clone(),
                    std::cmp::Ordering::Greater => gr.clone(),
                })),
            }
        }
        Tuple(t)
    });
    Relation::new(scope, tuples)
}
