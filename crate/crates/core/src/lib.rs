//! Minimal constraint networks.
//!
//! Compile the minimal k-ary network of a constraint network, attach witness
//! solutions, check minimality, supersymmetry of CNF formulas and
//! k-decomposability of relations, build the reduction gadgets that connect
//! these problems, and answer lookup queries over compiled networks.

pub mod cnf;
pub mod compile;
pub mod decomp;
pub mod encode;
pub mod error;
pub mod gadgets;
pub mod io;
pub mod network;
pub mod query;
pub mod relation;
pub mod sat;
pub mod search;
pub mod value;
pub mod verify;

pub use error::{Error, Result};
pub use network::{
    complete_network, complete_schema, find_solution, solve_all, FindOutcome, Network, Schema,
};
pub use relation::{natural_join, project, relation_equal, Relation};
pub use search::DEFAULT_BUDGET;
pub use value::{PartialAssignment, Scope, Tuple, Value, VariableId};
