use crate::error::Result;
use crate::network::Network;
use crate::relation::Relation;
use crate::value::{Tuple, Value};

/// `maps[v][i]` is the original value renamed to `i + 1` for variable `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueMaps(pub Vec<Vec<Value>>);

impl ValueMaps {
    pub fn to_original(&self, t: &Tuple) -> Tuple {
        Tuple(
            t.values()
                .iter()
                .enumerate()
                .map(|(v, x)| {
                    let i = x.as_number().expect("standardized value") as usize;
                    self.0[v][i - 1].clone()
                })
                .collect(),
        )
    }

    pub fn to_standard(&self, t: &Tuple) -> Option<Tuple> {
        t.values()
            .iter()
            .enumerate()
            .map(|(v, x)| {
                self.0[v]
                    .binary_search(x)
                    .ok()
                    .map(|i| Value::Number(i as i64 + 1))
            })
            .collect::<Option<Vec<_>>>()
            .map(Tuple)
    }
}

/// Renames each variable's domain to 1..=|dom| (preserving value order), so
/// the total domain is as large as the largest single domain.
pub fn standardize_domains(net: &Network) -> Result<(Network, ValueMaps)> {
    let maps = ValueMaps(net.domains().to_vec());
    let mut out = Network::new(net.variables().iter().zip(net.domains()).map(|(v, d)| {
        (
            v.name().to_string(),
            (1..=d.len() as i64).map(Value::Number).collect::<Vec<_>>(),
        )
    }))?;
    for rel in net.constraints() {
        let ranks: Vec<usize> = rel.scope().ranks().map(|r| r as usize).collect();
        let rows = rel.tuples().iter().map(|t| {
            Tuple(
                t.values()
                    .iter()
                    .zip(&ranks)
                    .map(|(x, &r)| {
                        let i = maps.0[r].binary_search(x).expect("value in domain");
                        Value::Number(i as i64 + 1)
                    })
                    .collect(),
            )
        });
        out.add_constraint(Relation::new(rel.scope().clone(), rows)?)?;
    }
    Ok((out, maps))
}
