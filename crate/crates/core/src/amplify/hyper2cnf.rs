use crate::csp::{Clause, CnfFormula, ConstraintHypergraph, HyperAssignment, Kind, Literal, Monomial, Weight};
use crate::{Error, Result};

/// Auxiliary variable definitions, evaluated in order by `lift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Def {
    And { out: u32, a: u32, b: u32 },
    Xor { out: u32, a: u32, b: u32 },
    Copy { out: u32, from: u32 },
    Zero { out: u32 },
}

/// 3CNF encoding of a 1-restricted hypergraph over F₂.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperCnf {
    pub formula: CnfFormula,
    pub vertex_count: u32,
    /// Clause range `start..end` of each hyperedge's block.
    pub blocks: Vec<(usize, usize)>,
    defs: Vec<Def>,
}

/// Variable `v + 1` per vertex and `|V| + e + 1` per edge (`w_e`). Each edge
/// `P + b = 0` becomes Tseitin clauses for `w_e = P` (an AND gadget per
/// quadratic monomial, a 4-clause XOR per addition) plus the unit clause `w_e`
/// when `b = 1`, `¬w_e` otherwise. Edge weights carry over to every clause of
/// the block. Always-true edges are treated as `0 = 0`.
pub fn hypergraph_to_3sat(h: &ConstraintHypergraph) -> Result<HyperCnf> {
    if h.alphabet_bits != 1 {
        return Err(Error::InvalidParameter(format!("alphabet must be F2, got {} bits", h.alphabet_bits)));
    }
    let restriction = h.restriction()?;
    if restriction > 1 {
        let e = h.constraints.iter().position(|c| c.polys().is_some_and(|p| p.len() > 1)).unwrap_or(0);
        return Err(Error::NotRestricted(e));
    }
    let nv = h.vertex_count;
    let mut next = nv + h.edge_count() as u32 + 1;
    let mut fresh = || {
        next += 1;
        next - 1
    };
    let mut clauses = Vec::new();
    let mut blocks = Vec::with_capacity(h.edge_count());
    let mut defs = Vec::new();
    for (e, (vs, c)) in h.edges.iter().zip(&h.constraints).enumerate() {
        let start = clauses.len();
        let weight = Weight::from_integer(h.weights[e] as i64);
        let mut push = |lits: Vec<Literal>| clauses.push(Clause::weighted(lits, weight));
        let w = nv + e as u32 + 1;
        let poly = c.polys().and_then(|p| p.first()).cloned().unwrap_or_default();
        let global = poly.map(|co| crate::csp::Coord::new(vs[co.slot as usize], 0));
        let mut terms = Vec::new();
        for m in global.monomials() {
            match *m {
                Monomial::Linear(c) => terms.push(c.slot + 1),
                Monomial::Quadratic(a, b) => {
                    let (x, y, out) = (a.slot + 1, b.slot + 1, fresh());
                    push(vec![Literal::neg(x), Literal::neg(y), Literal::pos(out)]);
                    push(vec![Literal::pos(x), Literal::neg(out)]);
                    push(vec![Literal::pos(y), Literal::neg(out)]);
                    defs.push(Def::And { out, a: x, b: y });
                    terms.push(out);
                }
            }
        }
        match terms.len() {
            0 => {
                push(vec![Literal::neg(w)]);
                defs.push(Def::Zero { out: w });
            }
            1 => {
                push(vec![Literal::neg(terms[0]), Literal::pos(w)]);
                push(vec![Literal::pos(terms[0]), Literal::neg(w)]);
                defs.push(Def::Copy { out: w, from: terms[0] });
            }
            r => {
                let mut acc = terms[0];
                for (i, &t) in terms.iter().enumerate().skip(1) {
                    let out = if i == r - 1 { w } else { fresh() };
                    let (a, b, c) = (acc, t, out);
                    push(vec![Literal::pos(a), Literal::pos(b), Literal::neg(c)]);
                    push(vec![Literal::pos(a), Literal::neg(b), Literal::pos(c)]);
                    push(vec![Literal::neg(a), Literal::pos(b), Literal::pos(c)]);
                    push(vec![Literal::neg(a), Literal::neg(b), Literal::neg(c)]);
                    defs.push(Def::Xor { out, a, b });
                    acc = out;
                }
            }
        }
        push(vec![Literal::new(w, !poly.constant_term())]);
        blocks.push((start, clauses.len()));
    }
    let formula = CnfFormula::new(next - 1, Kind::Sat, clauses)?;
    let bound = ((1u64 << h.rank().min(63)) + 1).saturating_mul(h.size());
    if formula.size() > bound {
        return Err(Error::SizeBound { got: formula.size(), bound });
    }
    Ok(HyperCnf { formula, vertex_count: nv, blocks, defs })
}

impl HyperCnf {
    /// Vertex values copied, `w_e` and gadget variables computed.
    pub fn lift(&self, a: &HyperAssignment) -> Vec<bool> {
        let mut x = vec![false; self.formula.n() as usize];
        for v in 0..self.vertex_count {
            x[v as usize] = a.get(v, 0);
        }
        let at = |x: &[bool], v: u32| x[v as usize - 1];
        for d in &self.defs {
            let (out, value) = match *d {
                Def::And { out, a, b } => (out, at(&x, a) && at(&x, b)),
                Def::Xor { out, a, b } => (out, at(&x, a) ^ at(&x, b)),
                Def::Copy { out, from } => (out, at(&x, from)),
                Def::Zero { out } => (out, false),
            };
            x[out as usize - 1] = value;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{Constraint, Coord, Gf2Poly, Oracle};
    use proptest::prelude::*;

    fn product_edge(b: bool) -> ConstraintHypergraph {
        let mut h = ConstraintHypergraph::new(2, 1);
        let p = Gf2Poly::product(Coord::new(0, 0), Coord::new(1, 0)).add_constant(b);
        h.add_edge(vec![0, 1], Constraint::Restricted(vec![p]));
        h
    }

    #[test]
    fn smallest_case() {
        let c = hypergraph_to_3sat(&product_edge(false)).unwrap();
        // AND gadget (3), copy into w (2), unit ¬w.
        assert_eq!(c.formula.m(), 6);
        let last = c.formula.clauses().last().unwrap();
        assert_eq!(last.lits, vec![Literal::neg(3)]);
        let flipped = hypergraph_to_3sat(&product_edge(true)).unwrap();
        assert_eq!(flipped.formula.factor_graph().slots, c.formula.factor_graph().slots);
        assert_eq!(flipped.formula.clauses().last().unwrap().lits, vec![Literal::pos(3)]);
        let differ = (0..6).filter(|&i| flipped.formula.clauses()[i] != c.formula.clauses()[i]).count();
        assert_eq!(differ, 1);
    }

    fn arb_hypergraph() -> impl Strategy<Value = ConstraintHypergraph> {
        let edge = (prop::collection::vec(0u32..4, 1..=4), prop::collection::vec((0u32..4, 0u32..4, any::<bool>()), 0..4), any::<bool>());
        prop::collection::vec(edge, 1..4).prop_map(|edges| {
            let mut h = ConstraintHypergraph::new(4, 1);
            for (vs, terms, b) in edges {
                let r = vs.len() as u32;
                let ms = terms
                    .into_iter()
                    .map(|(i, j, quad)| {
                        let (a, c) = (Coord::new(i % r, 0), Coord::new(j % r, 0));
                        if quad { Monomial::product(a, c) } else { Monomial::Linear(a) }
                    })
                    .collect();
                h.add_edge(vs, Constraint::Restricted(vec![Gf2Poly::new(ms, b)]));
            }
            h
        })
    }

    proptest! {
        #[test]
        fn satisfiability_and_size(h in arb_hypergraph()) {
            let c = hypergraph_to_3sat(&h).unwrap();
            prop_assert!(c.formula.max_arity() <= 3);
            prop_assert!(c.formula.size() <= ((1u64 << h.rank()) + 1) * h.size());
            let oracle = Oracle::default();
            prop_assert_eq!(oracle.is_satisfiable(&h).unwrap(), oracle.is_satisfiable(&c.formula).unwrap());
            for x in 0..16u64 {
                let a = HyperAssignment::from_values(1, &(0..4).map(|v| (x >> v) & 1).collect::<Vec<_>>());
                let lifted = c.lift(&a);
                for (e, &(s, t)) in c.blocks.iter().enumerate() {
                    let ok = c.formula.clauses()[s..t].iter().all(|cl| cl.eval(Kind::Sat, &lifted));
                    prop_assert_eq!(ok, h.edge_satisfied(e, &a));
                }
            }
        }
    }
}
