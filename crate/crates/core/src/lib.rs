//! Universal factor graphs for 3SAT and the factor-graph-preserving reductions
//! built on top of them.
//!
//! The crate is organized as a pipeline of passes over a small set of
//! constraint-system IRs:
//!
//! * [`csp`] holds CNF formulas, factor graphs, polarity templates, degree-2
//!   GF(2) polynomials and constraint hypergraphs, plus the exhaustive oracles
//!   every property test relies on.
//! * [`universal_poly`] and [`universal_circuit`] build factor graphs whose
//!   polarity completions cover every 3CNF formula of a given size.
//! * [`sparsify`] splits a formula into a disjunction of sparse branches.
//! * [`amplify`] is the gap-doubling pipeline (constraint graphs, expanders,
//!   graph powering, alphabet reduction, back to 3CNF).
//! * [`longcode`] contains long-code encoding, (oblivious) folding and the
//!   inner-verifier clause generators.
//! * [`downstream`] covers the max-EkSAT mixture and the 3SAT → NAE → 2LIN chain.

pub mod amplify;
pub mod csp;
pub mod downstream;
mod error;
pub mod longcode;
pub mod seed;
pub mod sparsify;
pub mod universal_circuit;
pub mod universal_poly;

pub use crate::error::{Error, Result};
