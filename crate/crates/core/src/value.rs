//! Domain values, variable identities, scopes and tuples.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A domain element. Numbers sort before symbols; each kind sorts naturally.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Number(i64),
    Symbol(Arc<str>),
}

impl Value {
    pub fn sym(s: &str) -> Self {
        Value::Symbol(Arc::from(s))
    }

    pub fn as_number(&self) -> Option<i64> {
        match self {
            Value::Number(n) => Some(*n),
            Value::Symbol(_) => None,
        }
    }

    pub fn is_number(&self) -> bool {
        matches!(self, Value::Number(_))
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Number(n)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::sym(s)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => write!(f, "{n}"),
            Value::Symbol(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => write!(f, "{n}"),
            Value::Symbol(s) => write!(f, "{s:?}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Number(n) => serializer.serialize_i64(*n),
            Value::Symbol(s) => serializer.serialize_str(s),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(i64),
            Symbol(String),
        }
        Ok(
            match Raw::deserialize(deserializer)
                .map_err(|_| serde::de::Error::custom("expected an integer or a string value"))?
            {
                Raw::Number(n) => Value::Number(n),
                Raw::Symbol(s) => Value::Symbol(Arc::from(s)),
            },
        )
    }
}

/// A variable: its name plus its position in the global variable order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VariableId {
    rank: u32,
    name: Arc<str>,
}

impl VariableId {
    pub fn new(name: &str, rank: u32) -> Self {
        VariableId {
            rank,
            name: Arc::from(name),
        }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl Ord for VariableId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .cmp(&other.rank)
            .then_with(|| self.name.cmp(&other.name))
    }
}

impl PartialOrd for VariableId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl fmt::Debug for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.rank)
    }
}

/// A non-empty, strictly rank-increasing list of variables.
///
/// Scopes order canonically by arity first, then lexicographically by rank.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scope(Vec<VariableId>);

impl Scope {
    pub fn new(vars: Vec<VariableId>) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::InvalidScope("scope must not be empty".into()));
        }
        for w in vars.windows(2) {
            if w[0].rank >= w[1].rank {
                return Err(Error::InvalidScope(format!(
                    "variables {} and {} are not in increasing order",
                    w[0], w[1]
                )));
            }
        }
        Ok(Scope(vars))
    }

    /// Builds a scope from variables in any order; duplicates are an error.
    pub fn from_unsorted(mut vars: Vec<VariableId>) -> Result<Self> {
        vars.sort();
        Scope::new(vars)
    }

    pub fn vars(&self) -> &[VariableId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ranks(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().map(|v| v.rank)
    }

    pub fn position(&self, var: &VariableId) -> Option<usize> {
        self.0
            .binary_search_by(|v| v.rank.cmp(&var.rank))
            .ok()
            .filter(|&i| self.0[i] == *var)
    }

    pub fn contains(&self, var: &VariableId) -> bool {
        self.position(var).is_some()
    }

    pub fn is_subset_of(&self, other: &Scope) -> bool {
        self.0.iter().all(|v| other.contains(v))
    }

    /// Rank-ordered union of several scopes.
    pub fn union<'a>(scopes: impl IntoIterator<Item = &'a Scope>) -> Result<Scope> {
        let mut all: Vec<VariableId> = scopes
            .into_iter()
            .flat_map(|s| s.0.iter().cloned())
            .collect();
        all.sort();
        all.dedup();
        for w in all.windows(2) {
            if w[0].rank == w[1].rank {
                return Err(Error::ScopeMismatch(format!(
                    "variables {} and {} share rank {}",
                    w[0], w[1], w[0].rank
                )));
            }
        }
        Scope::new(all)
    }
}

impl Ord for Scope {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Scope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Scope {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter().map(|v| v.name()))
    }
}

/// A tuple of values, positionally aligned with some scope.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tuple(pub Vec<Value>);

impl Tuple {
    pub fn new(values: Vec<Value>) -> Self {
        Tuple(values)
    }

    pub fn numbers(values: &[i64]) -> Self {
        Tuple(values.iter().map(|&n| Value::Number(n)).collect())
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for Tuple {
    type Output = Value;
    fn index(&self, i: usize) -> &Value {
        &self.0[i]
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Variable bindings for a subset of a network's variables.
pub type PartialAssignment = BTreeMap<VariableId, Value>;
