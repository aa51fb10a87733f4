//! A factor graph with `n + n³` variables and `2n³` clauses whose polarity
//! completions embed every 3CNF formula over `n` variables.
//!
//! Each ordered variable tuple `(a, b, c)` gets an auxiliary variable `z` and
//! the clause pair `(a, b, z)`, `(c, z, z)`. A source clause on that tuple is
//! embedded as `(ℓa ∨ ℓb ∨ ¬z) ∧ (ℓc ∨ z ∨ z)`; unused tuples stay all
//! positive and are switched off by `z = 1`.

use std::collections::HashSet;

use crate::csp::{CnfFormula, FactorGraph, Kind, Literal, PolarityTemplate, Weight};
use crate::{Error, Result};

/// Upper bound on `n³` accepted by [`build_poly_universal`].
pub const MAX_TUPLES: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyUniversal {
    pub n: u32,
    pub fg: FactorGraph,
}

impl PolyUniversal {
    pub fn tuple_count(&self) -> u64 {
        (self.n as u64).pow(3)
    }

    /// Lexicographic index of the 1-based tuple `(a, b, c)`.
    pub fn tuple_index(&self, t: [u32; 3]) -> usize {
        let n = self.n as usize;
        (t[0] as usize - 1) * n * n + (t[1] as usize - 1) * n + (t[2] as usize - 1)
    }

    /// Auxiliary variable of tuple `i`.
    pub fn aux_var(&self, i: usize) -> u32 {
        self.n + 1 + i as u32
    }

    /// Indices of the two clauses generated by tuple `i`.
    pub fn clause_positions(&self, i: usize) -> (usize, usize) {
        (2 * i, 2 * i + 1)
    }
}

pub fn build_poly_universal(n: u32) -> Result<PolyUniversal> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let tuples = (n as u64).pow(3);
    if tuples > MAX_TUPLES {
        return Err(Error::SizeCap(format!("n³ = {tuples} tuples exceeds {MAX_TUPLES}")));
    }
    let mut slots = Vec::with_capacity(2 * tuples as usize);
    let mut z = n;
    for a in 1..=n {
        for b in 1..=n {
            for c in 1..=n {
                z += 1;
                slots.push(vec![a, b, z]);
                slots.push(vec![c, z, z]);
            }
        }
    }
    let weights = vec![Weight::from_integer(1); slots.len()];
    Ok(PolyUniversal { n, fg: FactorGraph { n: n + tuples as u32, kind: Kind::Sat, slots, weights } })
}

/// Pads a 1- or 2-literal clause to three slots by repeating its last literal.
fn as_triple(lits: &[Literal], index: usize) -> Result<[Literal; 3]> {
    match *lits {
        [a] => Ok([a, a, a]),
        [a, b] => Ok([a, b, b]),
        [a, b, c] => Ok([a, b, c]),
        _ => Err(Error::BadArity(index)),
    }
}

/// Distinct orderings of a triple, identity first.
fn orderings(t: [Literal; 3]) -> Vec<[Literal; 3]> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out: Vec<[Literal; 3]> = Vec::new();
    for p in PERMS {
        let q = [t[p[0]], t[p[1]], t[p[2]]];
        if !out.contains(&q) {
            out.push(q);
        }
    }
    out
}

/// Polarity template embedding `f` into `u`. Clauses whose tuple is already
/// taken are moved to the first free reordering of their literals.
pub fn embed_poly(u: &PolyUniversal, f: &CnfFormula) -> Result<PolarityTemplate> {
    if f.kind() != Kind::Sat {
        return Err(Error::KindMismatch { expected: "sat", got: f.kind().as_str() });
    }
    if f.n() > u.n {
        return Err(Error::VariableOutOfRange { var: f.n(), n: u.n });
    }
    let mut bits = vec![false; 6 * u.tuple_count() as usize];
    let mut used = HashSet::new();
    for (index, clause) in f.clauses().iter().enumerate() {
        let triple = as_triple(&clause.lits, index)?;
        let key = [triple[0].var, triple[1].var, triple[2].var];
        let chosen = orderings(triple)
            .into_iter()
            .find(|t| !used.contains(&[t[0].var, t[1].var, t[2].var]))
            .ok_or(Error::TupleExhausted(key))?;
        let tuple = [chosen[0].var, chosen[1].var, chosen[2].var];
        used.insert(tuple);
        let (first, second) = u.clause_positions(u.tuple_index(tuple));
        // (a, b, z) then (c, z, z), three slots per clause.
        bits[3 * first] = chosen[0].negated;
        bits[3 * first + 1] = chosen[1].negated;
        bits[3 * first + 2] = true;
        bits[3 * second] = chosen[2].negated;
    }
    Ok(PolarityTemplate::new(bits))
}

/// The embedded instance itself.
pub fn embed_formula(u: &PolyUniversal, f: &CnfFormula) -> Result<CnfFormula> {
    u.fg.apply(&embed_poly(u, f)?)
}

/// Extends an assignment of the source variables to the embedded instance,
/// choosing each auxiliary variable so that its clause pair holds if possible.
pub fn lift_assignment(u: &PolyUniversal, embedded: &CnfFormula, x: &[bool]) -> Vec<bool> {
    let mut a = x.to_vec();
    a.resize(u.n as usize, false);
    a.resize(u.fg.n as usize, true);
    for i in 0..u.tuple_count() as usize {
        let (first, second) = u.clause_positions(i);
        let c1 = &embedded.clauses()[first];
        let c2 = &embedded.clauses()[second];
        let z = u.aux_var(i) as usize - 1;
        a[z] = true;
        if !(c1.eval(Kind::Sat, &a) && c2.eval(Kind::Sat, &a)) {
            a[z] = false;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{brute_force_unsat, factor_graph_of, find_satisfying, DEFAULT_SEARCH_BUDGET};
    use num_traits::Zero;

    #[test]
    fn sizes() {
        for (n, vars, clauses) in [(1, 2, 2), (2, 10, 16), (3, 30, 54)] {
            let u = build_poly_universal(n).unwrap();
            assert_eq!((u.fg.n, u.fg.m()), (vars, clauses));
        }
    }

    #[test]
    fn tuple_clauses() {
        let u = build_poly_universal(3).unwrap();
        let i = u.tuple_index([1, 2, 3]);
        let z = u.aux_var(i);
        let (a, b) = u.clause_positions(i);
        assert_eq!(u.fg.slots[a], vec![1, 2, z]);
        assert_eq!(u.fg.slots[b], vec![3, z, z]);
    }

    #[test]
    fn embedding_of_a_single_clause() {
        let u = build_poly_universal(3).unwrap();
        let f = CnfFormula::from_dimacs(3, &[&[1, -2, 3]]).unwrap();
        let g = embed_formula(&u, &f).unwrap();
        let i = u.tuple_index([1, 2, 3]);
        let z = u.aux_var(i) as i64;
        let (a, b) = u.clause_positions(i);
        let lits = |c: usize| g.clauses()[c].lits.iter().map(|l| l.to_dimacs()).collect::<Vec<_>>();
        assert_eq!(lits(a), vec![1, -2, -z]);
        assert_eq!(lits(b), vec![3, z, z]);
        let negated = g.polarities().bits.iter().filter(|&&b| b).count();
        assert_eq!(negated, 2);
        assert_eq!(factor_graph_of(&g), u.fg);
    }

    #[test]
    fn empty_formula_is_satisfied_by_all_true_aux() {
        let u = build_poly_universal(2).unwrap();
        let g = embed_formula(&u, &CnfFormula::new(2, Kind::Sat, vec![]).unwrap()).unwrap();
        assert!(g.is_satisfied_by(&vec![true; g.n() as usize]));
    }

    #[test]
    fn retuples_duplicates() {
        let u = build_poly_universal(2).unwrap();
        let f = CnfFormula::from_dimacs(2, &[&[1, 2, 2], &[-1, 2, 2], &[1, -2, 2]]).unwrap();
        assert!(embed_poly(&u, &f).is_ok());
        let g = CnfFormula::from_dimacs(2, &[&[1, 2, 2], &[-1, 2, 2], &[1, -2, 2], &[1, 2, -2]]).unwrap();
        assert_eq!(embed_poly(&u, &g), Err(Error::TupleExhausted([1, 2, 2])));
    }

    #[test]
    fn equisatisfiable_on_random_formulas() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let u = build_poly_universal(3).unwrap();
        for _ in 0..200 {
            let m = rng.gen_range(1..8);
            let clauses: Vec<Vec<i64>> = (0..m)
                .map(|_| (0..3).map(|_| rng.gen_range(1..=3i64) * if rng.gen() { 1 } else { -1 }).collect())
                .collect();
            let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
            let f = CnfFormula::from_dimacs(3, &refs).unwrap();
            let Ok(g) = embed_formula(&u, &f) else { continue };
            let sat = brute_force_unsat(&f).unwrap().is_zero();
            let found = find_satisfying(&g, DEFAULT_SEARCH_BUDGET).unwrap();
            assert_eq!(sat, found.is_some());
            if sat {
                let x = (0..8u32)
                    .map(|m| (0..3).map(|i| (m >> i) & 1 == 1).collect::<Vec<_>>())
                    .find(|a| f.is_satisfied_by(a))
                    .unwrap();
                assert!(g.is_satisfied_by(&lift_assignment(&u, &g, &x)));
            }
        }
    }
}
