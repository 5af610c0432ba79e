//! Reduction gadgets: executable versions of the constructions that connect
//! SAT, 3-colorability, minimal networks and k-decomposability.

mod astar;
mod bivalued;
mod sat_network;
mod standardize;
mod symmetry;
mod threecol;
mod trivalued;

pub use astar::{astar_pipeline, AStarOptions, AStarReport, BacktrackingFinder, SolutionFinder};
pub use bivalued::{bivalued_construction, BivaluedParams};
pub use sat_network::sat_to_network;
pub use standardize::{standardize_domains, ValueMaps};
pub use symmetry::{symmetry_transform, ExpansionMap};
pub use threecol::{threecol_network, threecol_to_constraint};
pub use trivalued::trivalued_construction;

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Undirected simple graph on vertices 1..=n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::Input(format!("self-loop on vertex {u}")));
            }
            if u < 1 || v < 1 || u > n || v > n {
                return Err(Error::Input(format!("edge ({u},{v}) outside 1..={n}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph { n, edges: set })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v)));
        Graph::new(n, edges).expect("valid complete graph")
    }

    pub fn cycle(n: usize) -> Self {
        let edges = (1..=n).map(|u| (u, u % n + 1));
        Graph::new(n, edges).expect("valid cycle")
    }

    pub fn without_edge(&self, u: usize, v: usize) -> Self {
        let mut g = self.clone();
        g.edges.remove(&(u.min(v), u.max(v)));
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }
}
