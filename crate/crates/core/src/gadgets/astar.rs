use std::collections::HashMap;

use super::{sat_to_network, symmetry_transform};
use crate::cnf::Cnf;
use crate::error::{Error, Result};
use crate::network::{find_solution, FindOutcome, Network};
use crate::value::{PartialAssignment, Tuple, Value};

/// A procedure that proposes a solution of a network. Its output is never
/// trusted: the pipeline verifies it before answering.
pub trait SolutionFinder {
    fn find(&self, net: &Network, step_budget: u64) -> Option<Tuple>;
}

/// Complete backtracking search; given enough budget it finds a solution
/// whenever one exists.
#[derive(Clone, Copy, Debug, Default)]
pub struct BacktrackingFinder;

impl SolutionFinder for BacktrackingFinder {
    fn find(&self, net: &Network, step_budget: u64) -> Option<Tuple> {
        match find_solution(net, &PartialAssignment::new(), step_budget) {
            Ok(FindOutcome::Found(t)) => Some(t),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AStarOptions {
    pub symmetry_k: usize,
    pub arity: usize,
    pub step_budget: u64,
}

impl Default for AStarOptions {
    fn default() -> Self {
        AStarOptions {
            symmetry_k: 2,
            arity: 2,
            step_budget: crate::search::DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AStarReport {
    pub satisfiable: bool,
    pub transformed_clauses: usize,
    pub network_variables: usize,
    pub network_constraints: usize,
    /// Assignment to the original atoms read off a verified solution by
    /// majority over each atom's fresh copies.
    pub assignment: Option<Vec<(String, bool)>>,
}

/// Transforms `cnf` with T and S, asks `finder` for a solution and answers
/// satisfiable only when the proposal is a solution of the network.
pub fn astar_pipeline(
    cnf: &Cnf,
    finder: &dyn SolutionFinder,
    opts: &AStarOptions,
) -> Result<AStarReport> {
    let (star, map) = symmetry_transform(cnf, opts.symmetry_k)?;
    if star.len() < 2 {
        return Err(Error::Input(format!(
            "the transformed formula has {} clauses; at least two are needed",
            star.len()
        )));
    }
    let net = sat_to_network(&star, opts.arity)?;
    let mut report = AStarReport {
        satisfiable: false,
        transformed_clauses: star.len(),
        network_variables: net.len(),
        network_constraints: net.constraint_count(),
        assignment: None,
    };
    let Some(w) = finder.find(&net, opts.step_budget) else {
        return Ok(report);
    };
    if w.len() != net.len() || !net.is_solution(&w) {
        return Ok(report);
    }
    let mut truth: HashMap<&str, bool> = HashMap::new();
    for v in w.values() {
        if let Value::Symbol(s) = v {
            match s.strip_prefix('-') {
                Some(atom) => truth.insert(atom, false),
                None => truth.insert(s, true),
            };
        }
    }
    let assignment = map
        .0
        .iter()
        .map(|(atom, fresh)| {
            let ones = fresh
                .iter()
                .filter(|f| truth.get(f.as_str()).copied().unwrap_or(false))
                .count();
            (atom.clone(), 2 * ones > fresh.len())
        })
        .collect();
    report.satisfiable = true;
    report.assignment = Some(assignment);
    Ok(report)
}
