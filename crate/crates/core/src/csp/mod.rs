//! Shared IR: CNF formulas, factor graphs, polarity templates, GF(2)
//! polynomials, constraint hypergraphs, and the exact oracles.

mod formula;
mod hypergraph;
mod oracle;
mod poly;
mod search;

pub use formula::{
    apply_polarities, factor_graph_of, Clause, CnfFormula, FactorGraph, Kind, Literal,
    PolarityTemplate, Weight,
};
pub use hypergraph::{
    is_close, Constraint, ConstraintHypergraph, HyperAssignment, HyperFactorGraph, TruthTable,
};
pub use oracle::{brute_force_unsat, Compiled, Oracle, Unsat, DEFAULT_ORACLE_CAP};
pub use poly::{Coord, Gf2Poly, Monomial};
pub use search::{exact_min_unsat, find_satisfying, DEFAULT_SEARCH_BUDGET};

/// Shorthand for a weight of `p/q`.
pub fn ratio(p: i64, q: i64) -> Weight {
    Weight::new(p, q)
}
