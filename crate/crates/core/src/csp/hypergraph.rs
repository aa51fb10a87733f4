use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::poly::{Coord, Gf2Poly};
use crate::{Error, Result};

/// Explicit constraint table over the concatenated slot values of an edge:
/// slot `i` occupies bits `i*k .. (i+1)*k` of the index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruthTable {
    pub bits: Vec<u64>,
}

impl TruthTable {
    pub fn from_fn(index_bits: u32, f: impl Fn(u64) -> bool) -> Self {
        let size = 1u64 << index_bits;
        let mut bits = vec![0u64; size.div_ceil(64) as usize];
        for i in 0..size {
            if f(i) {
                bits[(i / 64) as usize] |= 1 << (i % 64);
            }
        }
        TruthTable { bits }
    }

    pub fn get(&self, index: u64) -> bool {
        self.bits.get((index / 64) as usize).is_some_and(|w| (w >> (index % 64)) & 1 == 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Constraint {
    /// Satisfied iff every polynomial evaluates to 0. An empty list always holds.
    Restricted(Vec<Gf2Poly>),
    Table(TruthTable),
}

impl Constraint {
    pub fn always() -> Self {
        Constraint::Restricted(Vec::new())
    }

    /// Same constraint with every polynomial constant cleared.
    pub fn homogeneous(&self) -> Constraint {
        match self {
            Constraint::Restricted(ps) => Constraint::Restricted(ps.iter().map(Gf2Poly::homogeneous_part).collect()),
            Constraint::Table(t) => Constraint::Table(t.clone()),
        }
    }

    pub fn polys(&self) -> Option<&[Gf2Poly]> {
        match self {
            Constraint::Restricted(ps) => Some(ps),
            Constraint::Table(_) => None,
        }
    }

    /// `value(slot, bit)` reads the values of an edge with `arity` slots.
    pub fn eval(&self, arity: usize, alphabet_bits: u32, value: impl Fn(u32, u32) -> bool) -> bool {
        match self {
            Constraint::Restricted(ps) => ps.iter().all(|p| !p.eval(|c: Coord| value(c.slot, c.bit))),
            Constraint::Table(t) => {
                let mut index = 0u64;
                for slot in 0..arity as u32 {
                    for bit in 0..alphabet_bits {
                        if value(slot, bit) {
                            index |= 1 << (slot * alphabet_bits + bit);
                        }
                    }
                }
                t.get(index)
            }
        }
    }
}

/// A constraint hypergraph over alphabet `F_2^k`. Edges are vertex tuples
/// (repeats allowed); each carries a constraint and an integer multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConstraintHypergraph {
    pub vertex_count: u32,
    pub alphabet_bits: u32,
    pub edges: Vec<Vec<u32>>,
    pub constraints: Vec<Constraint>,
    pub weights: Vec<u64>,
}

impl ConstraintHypergraph {
    pub fn new(vertex_count: u32, alphabet_bits: u32) -> Self {
        ConstraintHypergraph { vertex_count, alphabet_bits, edges: Vec::new(), constraints: Vec::new(), weights: Vec::new() }
    }

    pub fn add_edge(&mut self, vertices: Vec<u32>, constraint: Constraint) -> usize {
        self.add_weighted_edge(vertices, constraint, 1)
    }

    pub fn add_weighted_edge(&mut self, vertices: Vec<u32>, constraint: Constraint, weight: u64) -> usize {
        self.edges.push(vertices);
        self.constraints.push(constraint);
        self.weights.push(weight);
        self.edges.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `|H|` = vertices + edges.
    pub fn size(&self) -> u64 {
        self.vertex_count as u64 + self.edges.len() as u64
    }

    pub fn rank(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn total_weight(&self) -> u128 {
        self.weights.iter().map(|&w| w as u128).sum()
    }

    /// Checks vertex ranges, coordinate ranges and weight vector length.
    pub fn validate(&self) -> Result<()> {
        if self.constraints.len() != self.edges.len() || self.weights.len() != self.edges.len() {
            return Err(Error::LengthMismatch(self.edges.len(), self.constraints.len().min(self.weights.len())));
        }
        for (e, (vs, c)) in self.edges.iter().zip(&self.constraints).enumerate() {
            for &v in vs {
                if v >= self.vertex_count {
                    return Err(Error::VertexOutOfRange { vertex: v, count: self.vertex_count });
                }
            }
            if let Constraint::Restricted(ps) = c {
                for p in ps {
                    if p.degree() > 2 || p.coords().any(|c| c.slot as usize >= vs.len() || c.bit >= self.alphabet_bits) {
                        return Err(Error::BadCoordinate(e));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_fully_restricted(&self) -> bool {
        self.constraints.iter().all(|c| matches!(c, Constraint::Restricted(_)))
    }

    /// Maximum number of polynomials on any edge, or an error if some edge is a table.
    pub fn restriction(&self) -> Result<usize> {
        let mut max = 0;
        for (e, c) in self.constraints.iter().enumerate() {
            match c {
                Constraint::Restricted(ps) => max = max.max(ps.len()),
                Constraint::Table(_) => return Err(Error::NotRestricted(e)),
            }
        }
        Ok(max)
    }

    pub fn edge_satisfied(&self, edge: usize, a: &HyperAssignment) -> bool {
        let vs = &self.edges[edge];
        self.constraints[edge].eval(vs.len(), self.alphabet_bits, |slot, bit| a.get(vs[slot as usize], bit))
    }

    pub fn violated_weight(&self, a: &HyperAssignment) -> u128 {
        (0..self.edges.len()).filter(|&e| !self.edge_satisfied(e, a)).map(|e| self.weights[e] as u128).sum()
    }

    pub fn is_satisfied_by(&self, a: &HyperAssignment) -> bool {
        (0..self.edges.len()).all(|e| self.edge_satisfied(e, a))
    }

    /// Fraction of (weighted) constraints violated by `a`.
    pub fn unsat_of(&self, a: &HyperAssignment) -> Result<Rational64> {
        to_ratio(self.violated_weight(a), self.total_weight())
    }

    pub fn factor_graph(&self) -> HyperFactorGraph {
        HyperFactorGraph {
            vertex_count: self.vertex_count,
            alphabet_bits: self.alphabet_bits,
            edges: self.edges.clone(),
            weights: self.weights.clone(),
            shapes: self.constraints.iter().map(Constraint::homogeneous).collect(),
        }
    }

    /// Vertex degree in slot-count convention: a self loop `[v, v]` adds 2.
    pub fn slot_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.vertex_count as usize];
        for vs in &self.edges {
            for &v in vs {
                deg[v as usize] += 1;
            }
        }
        deg
    }
}

pub(crate) fn to_ratio(num: u128, den: u128) -> Result<Rational64> {
    if den == 0 {
        return Err(Error::ZeroTotalWeight);
    }
    let g = num_integer::gcd(num, den);
    let (n, d) = (num / g, den / g);
    let n = i64::try_from(n).map_err(|_| Error::Overflow("UNSAT fraction"))?;
    let d = i64::try_from(d).map_err(|_| Error::Overflow("UNSAT fraction"))?;
    Ok(Rational64::new(n, d))
}

/// Structure of a hypergraph with every polynomial constant stripped. Two
/// restricted hypergraphs are close iff these are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HyperFactorGraph {
    pub vertex_count: u32,
    pub alphabet_bits: u32,
    pub edges: Vec<Vec<u32>>,
    pub weights: Vec<u64>,
    pub shapes: Vec<Constraint>,
}

pub fn is_close(a: &ConstraintHypergraph, b: &ConstraintHypergraph) -> Result<bool> {
    a.restriction()?;
    b.restriction()?;
    Ok(a.factor_graph() == b.factor_graph())
}

/// One alphabet word per vertex, stored as a flat bit vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HyperAssignment {
    pub alphabet_bits: u32,
    words: Vec<u64>,
}

impl HyperAssignment {
    pub fn zeros(vertex_count: u32, alphabet_bits: u32) -> Self {
        let total = vertex_count as usize * alphabet_bits as usize;
        HyperAssignment { alphabet_bits, words: vec![0; total.div_ceil(64)] }
    }

    /// Builds from one value per vertex (`alphabet_bits ≤ 64`).
    pub fn from_values(alphabet_bits: u32, values: &[u64]) -> Self {
        let mut a = HyperAssignment::zeros(values.len() as u32, alphabet_bits);
        for (v, &x) in values.iter().enumerate() {
            for b in 0..alphabet_bits {
                a.set(v as u32, b, (x >> b) & 1 == 1);
            }
        }
        a
    }

    /// Builds from a flat vertex-major bit vector, as returned by the search.
    pub fn from_flat(alphabet_bits: u32, bits: &[bool]) -> Self {
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, &b) in bits.iter().enumerate() {
            words[i / 64] |= (b as u64) << (i % 64);
        }
        HyperAssignment { alphabet_bits, words }
    }

    pub fn get(&self, vertex: u32, bit: u32) -> bool {
        let i = vertex as usize * self.alphabet_bits as usize + bit as usize;
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, vertex: u32, bit: u32, value: bool) {
        let i = vertex as usize * self.alphabet_bits as usize + bit as usize;
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    /// The value of `vertex` as an integer (`alphabet_bits ≤ 64`).
    pub fn value(&self, vertex: u32) -> u64 {
        (0..self.alphabet_bits.min(64)).fold(0, |acc, b| acc | ((self.get(vertex, b) as u64) << b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::poly::Monomial;

    fn neq_triangle(constant: bool) -> ConstraintHypergraph {
        let mut h = ConstraintHypergraph::new(3, 1);
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            let p = Gf2Poly::equality(Coord::new(0, 0), Coord::new(1, 0), constant);
            h.add_edge(vec![a, b], Constraint::Restricted(vec![p]));
        }
        h
    }

    #[test]
    fn evaluation_of_restricted_edges() {
        let h = neq_triangle(true);
        h.validate().unwrap();
        let a = HyperAssignment::from_values(1, &[0, 1, 0]);
        assert_eq!(h.violated_weight(&a), 1);
        assert_eq!(h.unsat_of(&a).unwrap(), Rational64::new(1, 3));
    }

    #[test]
    fn closeness() {
        let h = neq_triangle(true);
        assert!(is_close(&h, &h).unwrap());
        let mut flipped = h.clone();
        flipped.constraints[1] = Constraint::Restricted(vec![Gf2Poly::equality(Coord::new(0, 0), Coord::new(1, 0), false)]);
        assert!(is_close(&h, &flipped).unwrap());
        let mut changed = h.clone();
        changed.constraints[1] = Constraint::Restricted(vec![Gf2Poly::new(
            vec![Monomial::product(Coord::new(0, 0), Coord::new(1, 0))],
            true,
        )]);
        assert!(!is_close(&h, &changed).unwrap());
        let mut table = h.clone();
        table.constraints[0] = Constraint::Table(TruthTable::from_fn(2, |_| true));
        assert_eq!(is_close(&h, &table), Err(Error::NotRestricted(0)));
    }

    #[test]
    fn table_constraints() {
        let mut h = ConstraintHypergraph::new(2, 2);
        h.add_edge(vec![0, 1], Constraint::Table(TruthTable::from_fn(4, |i| (i & 3) == (i >> 2))));
        assert!(h.is_satisfied_by(&HyperAssignment::from_values(2, &[2, 2])));
        assert!(!h.is_satisfied_by(&HyperAssignment::from_values(2, &[2, 1])));
    }

    #[test]
    fn rejects_bad_coordinates() {
        let mut h = ConstraintHypergraph::new(2, 1);
        h.add_edge(vec![0], Constraint::Restricted(vec![Gf2Poly::linear(Coord::new(1, 0))]));
        assert_eq!(h.validate(), Err(Error::BadCoordinate(0)));
    }
}
