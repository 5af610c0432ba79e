//! File formats: relation, network, extended-network and schema JSON, DIMACS
//! cnf and DIMACS edge graphs.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cnf::{Clause, Cnf, Literal};
use crate::compile::{ExtendedConstraint, ExtendedNetwork, ExtendedRow, PreferenceSpec};
use crate::error::{Error, Result};
use crate::gadgets::Graph;
use crate::network::{Network, Schema};
use crate::relation::Relation;
use crate::value::{Scope, Tuple, Value, VariableId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationFile {
    pub scope: Vec<String>,
    pub tuples: Vec<Vec<Value>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableFile {
    pub name: String,
    pub domain: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub variables: Vec<VariableFile>,
    #[serde(default)]
    pub constraints: Vec<RelationFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowFile {
    pub tuple: Vec<Value>,
    pub witnesses: Vec<Vec<Value>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendedConstraintFile {
    pub scope: Vec<String>,
    pub rows: Vec<RowFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendedFile {
    #[serde(flatten)]
    pub network: NetworkFile,
    pub k: usize,
    #[serde(rename = "K")]
    pub top_k: usize,
    #[serde(default)]
    pub preference: PreferenceSpec,
    pub extended: Vec<ExtendedConstraintFile>,
}

fn names(scope: &Scope) -> Vec<String> {
    scope.vars().iter().map(|v| v.name().to_string()).collect()
}

fn rows(tuples: &[Tuple]) -> Vec<Vec<Value>> {
    tuples.iter().map(|t| t.0.clone()).collect()
}

pub fn relation_to_file(rel: &Relation) -> RelationFile {
    RelationFile {
        scope: names(rel.scope()),
        tuples: rows(rel.tuples()),
    }
}

/// A standalone relation: the listed scope order is the variable order.
pub fn relation_from_file(file: &RelationFile) -> Result<Relation> {
    let scope = Scope::new(
        file.scope
            .iter()
            .enumerate()
            .map(|(i, n)| VariableId::new(n, i as u32))
            .collect(),
    )?;
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = file.scope.iter().find(|n| !seen.insert(n.as_str())) {
        return Err(Error::Input(format!("variable {dup} appears twice in the scope")));
    }
    Relation::new(scope, file.tuples.iter().cloned().map(Tuple))
}

/// Resolves `names` against `net` and reorders each tuple into rank order.
fn net_relation(net: &Network, names: &[String], tuples: &[Vec<Value>]) -> Result<Relation> {
    let vars = names
        .iter()
        .map(|n| net.require_var(n).cloned())
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..vars.len()).collect();
    order.sort_by_key(|&i| vars[i].rank());
    let scope = Scope::new(order.iter().map(|&i| vars[i].clone()).collect())?;
    let mut out = Vec::with_capacity(tuples.len());
    for t in tuples {
        if t.len() != names.len() {
            return Err(Error::ScopeMismatch(format!(
                "tuple of arity {} for scope ({})",
                t.len(),
                names.join(",")
            )));
        }
        out.push(Tuple(order.iter().map(|&i| t[i].clone()).collect()));
    }
    Relation::new(scope, out)
}

pub fn network_to_file(net: &Network) -> NetworkFile {
    NetworkFile {
        variables: net
            .variables()
            .iter()
            .zip(net.domains())
            .map(|(v, d)| VariableFile {
                name: v.name().to_string(),
                domain: d.clone(),
            })
            .collect(),
        constraints: net.constraints().map(relation_to_file).collect(),
    }
}

pub fn network_from_file(file: &NetworkFile) -> Result<Network> {
    let mut net = Network::new(
        file.variables
            .iter()
            .map(|v| (v.name.as_str(), v.domain.clone())),
    )?;
    for c in &file.constraints {
        let rel = net_relation(&net, &c.scope, &c.tuples)?;
        net.add_constraint(rel)?;
    }
    Ok(net)
}

pub fn extended_to_file(m: &ExtendedNetwork) -> ExtendedFile {
    ExtendedFile {
        network: network_to_file(&m.base),
        k: m.k,
        top_k: m.top_k,
        preference: m.preference.clone(),
        extended: m
            .extended
            .iter()
            .map(|ec| ExtendedConstraintFile {
                scope: names(&ec.scope),
                rows: ec
                    .rows
                    .iter()
                    .map(|r| RowFile {
                        tuple: r.tuple.0.clone(),
                        witnesses: rows(&r.witnesses),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Loads a compiled network. Row tuples must be given in rank order of the
/// scope, as written by [`extended_to_file`].
pub fn extended_from_file(file: &ExtendedFile) -> Result<ExtendedNetwork> {
    let base = network_from_file(&file.network)?;
    let mut extended = Vec::with_capacity(file.extended.len());
    for ec in &file.extended {
        let listed: Vec<&str> = ec.scope.iter().map(String::as_str).collect();
        let scope = base.scope(&listed)?;
        if names(&scope) != ec.scope {
            return Err(Error::Input(format!(
                "extended scope ({}) is not in variable order",
                ec.scope.join(",")
            )));
        }
        let rows = ec
            .rows
            .iter()
            .map(|r| ExtendedRow {
                tuple: Tuple(r.tuple.clone()),
                witnesses: r.witnesses.iter().cloned().map(Tuple).collect(),
            })
            .collect();
        extended.push(ExtendedConstraint { scope, rows });
    }
    extended.sort_by(|a, b| a.scope.cmp(&b.scope));
    let m = ExtendedNetwork {
        base,
        k: file.k,
        top_k: file.top_k,
        preference: file.preference.clone(),
        extended,
    };
    m.preference.resolve(&m.base)?;
    Ok(m)
}

/// A schema file is a JSON array of scopes, each an array of names from `rho`.
pub fn schema_from_json(text: &str, rho: &Relation) -> Result<Schema> {
    let raw: Vec<Vec<String>> = serde_json::from_str(text)?;
    let by_name: HashMap<&str, &VariableId> =
        rho.scope().vars().iter().map(|v| (v.name(), v)).collect();
    let mut scopes = Vec::with_capacity(raw.len());
    for s in raw {
        let vars = s
            .iter()
            .map(|n| {
                by_name
                    .get(n.as_str())
                    .map(|v| (*v).clone())
                    .ok_or_else(|| Error::Input(format!("schema variable {n} is not in the relation")))
            })
            .collect::<Result<Vec<_>>>()?;
        scopes.push(Scope::from_unsorted(vars)?);
    }
    Ok(Schema::new(scopes))
}

pub fn schema_to_json(schema: &Schema) -> String {
    let raw: Vec<Vec<String>> = schema.scopes().map(names).collect();
    serde_json::to_string(&raw).expect("schema serializes")
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable value")
}

pub fn relation_from_json(text: &str) -> Result<Relation> {
    relation_from_file(&serde_json::from_str(text)?)
}

pub fn network_from_json(text: &str) -> Result<Network> {
    network_from_file(&serde_json::from_str(text)?)
}

pub fn extended_from_json(text: &str) -> Result<ExtendedNetwork> {
    extended_from_file(&serde_json::from_str(text)?)
}

/// Parses DIMACS cnf. A comment `c var <n> <name>` names variable n;
/// unnamed variables are called `x<n>`.
pub fn parse_dimacs_cnf(text: &str) -> Result<Cnf> {
    let err = |line: usize, message: String| Error::Parse { line, message };
    let mut header: Option<(usize, usize)> = None;
    let mut named: BTreeMap<usize, String> = BTreeMap::new();
    let mut clauses: Vec<(usize, Vec<i64>)> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut start_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "%" {
            break;
        }
        if let Some(rest) = line.strip_prefix('c') {
            let mut words = rest.split_whitespace();
            if words.next() == Some("var") {
                let n: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| err(line_no, "expected a variable number after 'c var'".into()))?;
                let name = words
                    .next()
                    .ok_or_else(|| err(line_no, "expected a name after the variable number".into()))?;
                named.insert(n, name.to_string());
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let words: Vec<&str> = rest.split_whitespace().collect();
            if header.is_some() {
                return Err(err(line_no, "second problem line".into()));
            }
            match words.as_slice() {
                ["cnf", v, c] => {
                    let v = v.parse().map_err(|_| err(line_no, format!("bad variable count {v}")))?;
                    let c = c.parse().map_err(|_| err(line_no, format!("bad clause count {c}")))?;
                    header = Some((v, c));
                }
                _ => return Err(err(line_no, "expected 'p cnf <variables> <clauses>'".into())),
            }
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(err(line_no, "clause before the problem line".into()));
        };
        for word in line.split_whitespace() {
            let x: i64 = word
                .parse()
                .map_err(|_| err(line_no, format!("expected an integer literal, found {word:?}")))?;
            if x == 0 {
                clauses.push((start_line, std::mem::take(&mut current)));
                continue;
            }
            if x.unsigned_abs() as usize > vars {
                return Err(err(line_no, format!("literal {x} exceeds the declared {vars} variables")));
            }
            if current.is_empty() {
                start_line = line_no;
            }
            current.push(x);
        }
    }
    let Some((_, count)) = header else {
        return Err(err(1, "missing 'p cnf' problem line".into()));
    };
    if !current.is_empty() {
        clauses.push((start_line, current));
    }
    if clauses.len() != count {
        return Err(err(
            text.lines().count().max(1),
            format!("header declares {count} clauses but {} were read", clauses.len()),
        ));
    }
    let name = |n: usize| named.get(&n).cloned().unwrap_or_else(|| format!("x{n}"));
    let mut out = Vec::with_capacity(clauses.len());
    for (line, c) in clauses {
        let lits = c
            .iter()
            .map(|&x| Literal::new(&name(x.unsigned_abs() as usize), x > 0))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| err(line, e.to_string()))?;
        out.push(Clause::new(lits));
    }
    Ok(Cnf::new(out))
}

/// Writes DIMACS cnf numbering atoms in first-occurrence order, with a
/// `c var` comment per atom.
pub fn write_dimacs_cnf(cnf: &Cnf) -> String {
    let index = cnf.atom_index();
    let mut out = String::new();
    for (i, a) in cnf.atoms().enumerate() {
        let _ = writeln!(out, "c var {} {a}", i + 1);
    }
    let _ = writeln!(out, "p cnf {} {}", cnf.atom_count(), cnf.len());
    for c in cnf.clauses() {
        for l in c.literals() {
            let n = index[l.atom()] as i64 + 1;
            let _ = write!(out, "{} ", if l.is_positive() { n } else { -n });
        }
        out.push_str("0\n");
    }
    out
}

/// Parses DIMACS edge format (`p edge n m`, `e u v`).
pub fn parse_dimacs_graph(text: &str) -> Result<Graph> {
    let err = |line: usize, message: String| Error::Parse { line, message };
    let mut n: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let words: Vec<&str> = raw.split_whitespace().collect();
        match words.as_slice() {
            [] => {}
            ["c", ..] => {}
            ["p", kind, a, b] if *kind == "edge" || *kind == "col" => {
                if n.is_some() {
                    return Err(err(line_no, "second problem line".into()));
                }
                let a = a.parse().map_err(|_| err(line_no, format!("bad vertex count {a}")))?;
                let b = b.parse().map_err(|_| err(line_no, format!("bad edge count {b}")))?;
                n = Some((a, b));
            }
            ["e", u, v] => {
                let Some((count, _)) = n else {
                    return Err(err(line_no, "edge before the problem line".into()));
                };
                let u: usize = u.parse().map_err(|_| err(line_no, format!("bad vertex {u}")))?;
                let v: usize = v.parse().map_err(|_| err(line_no, format!("bad vertex {v}")))?;
                if u == v || u < 1 || v < 1 || u > count || v > count {
                    return Err(err(line_no, format!("invalid edge {u} {v}")));
                }
                edges.push((u, v));
            }
            _ => return Err(err(line_no, format!("unrecognized line {:?}", raw.trim()))),
        }
    }
    let Some((count, _)) = n else {
        return Err(err(1, "missing 'p edge' problem line".into()));
    };
    Graph::new(count, edges)
}

pub fn write_dimacs_graph(g: &Graph) -> String {
    let mut out = format!("p edge {} {}\n", g.vertex_count(), g.edge_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "e {u} {v}");
    }
    out
}
