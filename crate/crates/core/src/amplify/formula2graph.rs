use num_integer::Integer;

use crate::csp::{Constraint, ConstraintHypergraph, Coord, CnfFormula, Gf2Poly, HyperAssignment, Kind, Monomial};
use crate::{Error, Result};

/// Constraint graph of a formula, with the vertices created per clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintGraphOf {
    pub graph: ConstraintHypergraph,
    /// Clause vertices: `[u_ij, u_k]` for 3 literals, `[u_i, u_j]` for 2, none for 1.
    pub clause_vertices: Vec<Vec<u32>>,
}

fn bit(slot: u32, b: u32) -> Coord {
    Coord::new(slot, b)
}

/// 2-restricted constraint graph over `F₂³`. Bit 0 of a vertex carries the
/// value of a literal (0 = true). Variable `i` gets vertex `i - 1`; each
/// 3-literal clause adds `u_ij` (bits: the first two literals and their
/// conjunction-of-falsity) and `u_k`; each 2-literal clause adds `u_i`, `u_j`;
/// unit clauses become a self loop on the variable's vertex. Consistency
/// edges tie clause vertices to variable vertices, with a constant that is the
/// literal's negation flag.
pub fn to_constraint_graph(phi: &CnfFormula) -> Result<ConstraintGraphOf> {
    if phi.kind() != Kind::Sat {
        return Err(Error::KindMismatch { expected: "sat", got: phi.kind().as_str() });
    }
    let mut lcm = 1i64;
    for c in phi.clauses() {
        lcm = lcm.lcm(c.weight.denom());
    }
    let mut g = ConstraintHypergraph::new(phi.n(), 3);
    let mut clause_vertices = Vec::with_capacity(phi.m());
    let var = |v: u32| v - 1;
    for (index, c) in phi.clauses().iter().enumerate() {
        let w = u64::try_from(c.weight.numer() * (lcm / c.weight.denom())).map_err(|_| Error::NegativeWeight(index))?;
        let l = &c.lits;
        match l.len() {
            3 => {
                let (p, q) = (g.vertex_count, g.vertex_count + 1);
                g.vertex_count += 2;
                let both_false = Gf2Poly::new(vec![Monomial::Linear(bit(0, 2)), Monomial::product(bit(0, 0), bit(0, 1))], false);
                let clause_holds = Gf2Poly::product(bit(0, 2), bit(1, 0));
                g.add_weighted_edge(vec![p, q], Constraint::Restricted(vec![both_false, clause_holds]), w);
                for (vertex, b, lit) in [(p, 0, l[0]), (p, 1, l[1]), (q, 0, l[2])] {
                    let eq = Gf2Poly::equality(bit(0, b), bit(1, 0), lit.negated);
                    g.add_weighted_edge(vec![vertex, var(lit.var)], Constraint::Restricted(vec![eq]), w);
                }
                clause_vertices.push(vec![p, q]);
            }
            2 => {
                let (p, q) = (g.vertex_count, g.vertex_count + 1);
                g.vertex_count += 2;
                g.add_weighted_edge(vec![p, q], Constraint::Restricted(vec![Gf2Poly::product(bit(0, 0), bit(1, 0))]), w);
                for (vertex, lit) in [(p, l[0]), (q, l[1])] {
                    let eq = Gf2Poly::equality(bit(0, 0), bit(1, 0), lit.negated);
                    g.add_weighted_edge(vec![vertex, var(lit.var)], Constraint::Restricted(vec![eq]), w);
                }
                clause_vertices.push(vec![p, q]);
            }
            1 => {
                let v = var(l[0].var);
                let p = Gf2Poly::new(vec![Monomial::Linear(bit(0, 0))], l[0].negated);
                g.add_weighted_edge(vec![v, v], Constraint::Restricted(vec![p]), w);
                clause_vertices.push(vec![]);
            }
            _ => return Err(Error::BadArity(index)),
        }
    }
    Ok(ConstraintGraphOf { graph: g, clause_vertices })
}

impl ConstraintGraphOf {
    /// Honest encoding of a formula assignment.
    pub fn lift(&self, phi: &CnfFormula, x: &[bool]) -> HyperAssignment {
        let mut a = HyperAssignment::zeros(self.graph.vertex_count, 3);
        for (i, &v) in x.iter().enumerate().take(phi.n() as usize) {
            a.set(i as u32, 0, !v);
        }
        for (c, vs) in phi.clauses().iter().zip(&self.clause_vertices) {
            let f: Vec<bool> = c.lits.iter().map(|l| !l.eval(x)).collect();
            match vs.as_slice() {
                [p, q] if f.len() == 3 => {
                    a.set(*p, 0, f[0]);
                    a.set(*p, 1, f[1]);
                    a.set(*p, 2, f[0] && f[1]);
                    a.set(*q, 0, f[2]);
                }
                [p, q] => {
                    a.set(*p, 0, f[0]);
                    a.set(*q, 0, f[1]);
                }
                _ => {}
            }
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{brute_force_unsat, find_satisfying, is_close, DEFAULT_SEARCH_BUDGET};
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};

    #[test]
    fn single_clause_shape() {
        let phi = CnfFormula::from_dimacs(3, &[&[1, 2, 3]]).unwrap();
        let h = to_constraint_graph(&phi).unwrap().graph;
        assert_eq!((h.vertex_count, h.edge_count()), (5, 4));
        for c in &h.constraints[1..] {
            assert!(c.polys().unwrap().iter().all(|p| !p.constant_term()));
        }
        let flipped = to_constraint_graph(&CnfFormula::from_dimacs(3, &[&[1, -2, 3]]).unwrap()).unwrap().graph;
        assert!(is_close(&h, &flipped).unwrap());
        let diffs: Vec<usize> = (0..4).filter(|&e| h.constraints[e] != flipped.constraints[e]).collect();
        assert_eq!(diffs, vec![2]);
        assert!(flipped.constraints[2].polys().unwrap()[0].constant_term());
    }

    fn random_formula(rng: &mut impl Rng, n: u32, m: usize) -> CnfFormula {
        let clauses: Vec<Vec<i64>> = (0..m)
            .map(|_| {
                let len = rng.gen_range(1..=3);
                (0..len).map(|_| rng.gen_range(1..=n as i64) * if rng.gen() { 1 } else { -1 }).collect()
            })
            .collect();
        let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
        CnfFormula::from_dimacs(n, &refs).unwrap()
    }

    #[test]
    fn size_bound_and_completeness() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let m = rng.gen_range(1..7);
            let phi = random_formula(&mut rng, 4, m);
            let g = to_constraint_graph(&phi).unwrap();
            assert!(g.graph.size() <= 6 * phi.size());
            g.graph.validate().unwrap();
            let sat = brute_force_unsat(&phi).unwrap().is_zero();
            assert_eq!(find_satisfying(&g.graph, DEFAULT_SEARCH_BUDGET).unwrap().is_some(), sat);
            if let Some(x) = (0..16u32).map(|m| (0..4).map(|i| (m >> i) & 1 == 1).collect::<Vec<_>>()).find(|x| phi.is_satisfied_by(x)) {
                assert!(g.graph.is_satisfied_by(&g.lift(&phi, &x)));
            }
        }
    }

    #[test]
    fn soundness_factor_four() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let m = rng.gen_range(2..5);
            let phi = random_formula(&mut rng, 2, m);
            let g = to_constraint_graph(&phi).unwrap().graph;
            if g.vertex_count * 3 > 24 {
                continue;
            }
            let (uf, ug) = (brute_force_unsat(&phi).unwrap(), brute_force_unsat(&g).unwrap());
            assert!(uf <= ug * 4, "{uf} vs {ug}");
        }
    }
}
