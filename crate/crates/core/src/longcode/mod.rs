//! Long codes over small domains, folding, and the three-query inner verifier.
//!
//! A Boolean function on `n ≤ 4` bits is identified by its truth table read as
//! an integer: bit `x` of the id is `f(x)`. Functions on one domain form the
//! group `F_n` under pointwise XOR.

mod blob;
mod folding;
mod measures;
mod oblivious;
mod verifier;
mod word;

pub use blob::{read_blob, write_blob};
pub use folding::{equality_folding, FoldingBasis};
pub use measures::{
    count_close_long_codes, delta_lower_bound, distance, folded_affine_codewords, is_solid, linearity_failure,
    nearest_in_code,
};
pub use oblivious::{oblivious_split, Equality, ObliviousSplit};
pub use verifier::{
    build_verifier_formula, consistency_clauses, linearity_clauses, product_clauses, FoldedTable, TestMix, Verifier,
    VerifierParams,
};
pub use word::{encode_long_code, FunctionSpace, LongCodeWord, MAX_DOMAIN_BITS};
