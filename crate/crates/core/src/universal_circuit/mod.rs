//! A 3CNF template whose polarity completions encode every formula with a
//! given number of variables and clauses, built from a nondeterministic
//! consistency-checking circuit.
//!
//! The circuit reads the literal encodings of the formula plus two selector
//! bits per clause, picks one literal per clause, sorts the picks through an
//! oblivious comparator network and rejects if two adjacent picks are
//! complementary. Compiling it gate by gate gives a fixed factor graph; the
//! formula only decides the polarity of the unit clauses on its encoding bits.

mod circuit;
mod compile;
mod sorting;

pub use circuit::{build_consistency_circuit, build_with_network, encode_literal, literal_width, Circuit, Gate, GateKind, Wire};
pub use compile::{circuit_to_3cnf, decide_by_selectors, CircuitTemplate};
pub use sorting::{build_sorting_network, sorts, Batcher, SortingNetwork};
