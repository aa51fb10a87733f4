//! Gap amplification as a chain of factor-graph-preserving passes:
//! formula → 2-restricted constraint graph → regular graph → positive
//! expander → walk-powered graph → rank-4 hypergraph over F₂ → 3CNF.
//!
//! Every pass also exposes a `lift` that maps a satisfying assignment of its
//! input to one of its output, so completeness can be checked exactly even
//! where the output is far beyond exhaustive search.

mod alphabet;
mod expander;
mod expanderize;
mod formula2graph;
mod hyper2cnf;
mod pipeline;
mod power;
mod regularize;

pub use alphabet::{alphabet_reduce, AlphabetReduced, ReducedVertex};
pub use expander::{make_expander, make_expander_with, Certificate, ExpanderSpec, DEFAULT_DEGREE};
pub use expanderize::{expanderize, is_positive};
pub use formula2graph::{to_constraint_graph, ConstraintGraphOf};
pub use hyper2cnf::{hypergraph_to_3sat, HyperCnf};
pub use pipeline::{amplify, double_gap, DoubledGap, FgprParams, RoundStats, StageSize};
pub use power::{power_graph, Powered};
pub use regularize::{regularize, Regularized};

use serde::{Deserialize, Serialize};

use crate::csp::ConstraintHypergraph;

/// How a pass with an astronomically large edge multiset materializes it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Every edge of the multiset (grouped where identical), up to a size cap.
    Exhaustive,
    /// `count` uniformly drawn edge indices from a seeded stream.
    Sample { count: usize, seed: u64 },
}

/// Upper bound on edges emitted in exhaustive mode.
pub const EXHAUSTIVE_EDGE_CAP: u64 = 1 << 22;

/// Degree of each vertex of a rank-2 graph, counting a self loop once.
pub fn graph_degrees(g: &ConstraintHypergraph) -> Vec<usize> {
    let mut deg = vec![0usize; g.vertex_count as usize];
    for vs in &g.edges {
        match vs.as_slice() {
            [a, b] if a == b => deg[*a as usize] += 1,
            _ => {
                for &v in vs {
                    deg[v as usize] += 1;
                }
            }
        }
    }
    deg
}

/// Incident edges of each vertex in edge order, a self loop listed once.
pub fn incidences(g: &ConstraintHypergraph) -> Vec<Vec<usize>> {
    let mut inc = vec![Vec::new(); g.vertex_count as usize];
    for (e, vs) in g.edges.iter().enumerate() {
        match vs.as_slice() {
            [a, b] if a == b => inc[*a as usize].push(e),
            _ => {
                for &v in vs {
                    inc[v as usize].push(e);
                }
            }
        }
    }
    inc
}
