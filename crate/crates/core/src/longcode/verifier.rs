use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use super::folding::FoldingBasis;
use super::word::{FunctionSpace, MAX_DOMAIN_BITS};
use crate::csp::{Clause, CnfFormula, ConstraintHypergraph, HyperAssignment, Kind, Literal, Weight};
use crate::{seed, Error, Result};

/// Folded access to a stored table whose coset representatives are numbered
/// consecutively from `first_var`.
#[derive(Clone, Debug)]
pub struct FoldedTable {
    pub basis: FoldingBasis,
    pub first_var: u32,
    reps: Arc<Vec<u32>>,
}

impl FoldedTable {
    pub fn new(basis: FoldingBasis, first_var: u32) -> Self {
        let reps = Arc::new(basis.representatives());
        FoldedTable { basis, first_var, reps }
    }

    fn with_reps(basis: FoldingBasis, first_var: u32, reps: Arc<Vec<u32>>) -> Self {
        FoldedTable { basis, first_var, reps }
    }

    pub fn var_count(&self) -> u32 {
        self.reps.len() as u32
    }

    pub fn representatives(&self) -> &[u32] {
        &self.reps
    }

    /// Literal reading `A_f` (or its negation when `!positive`).
    pub fn literal(&self, f: u32, positive: bool) -> Literal {
        let (rep, sigma) = self.basis.mu(f);
        let at = self.reps.binary_search(&rep).expect("representative") as u32;
        Literal::new(self.first_var + at, self.basis.offset(sigma) == positive)
    }
}

fn clauses(lits: [[Literal; 3]; 4]) -> [Clause; 4] {
    lits.map(|l| Clause::new(l.to_vec()))
}

/// `A_f + A_g = A_{f+g}`.
pub fn linearity_clauses(a: &FoldedTable, f: u32, g: u32) -> [Clause; 4] {
    let l = |x: u32, p: bool| a.literal(x, p);
    let fg = f ^ g;
    clauses([
        [l(f, false), l(g, false), l(fg, false)],
        [l(f, false), l(g, true), l(fg, true)],
        [l(f, true), l(g, false), l(fg, true)],
        [l(f, true), l(g, true), l(fg, false)],
    ])
}

/// If `A_f = 0` then `A_{fg+h} = A_h`, else `A_{fg+g+h} = A_h`.
pub fn product_clauses(a: &FoldedTable, f: u32, g: u32, h: u32) -> [Clause; 4] {
    let l = |x: u32, p: bool| a.literal(x, p);
    let (low, high) = ((f & g) ^ h, (f & g) ^ g ^ h);
    clauses([
        [l(f, true), l(low, false), l(h, true)],
        [l(f, true), l(low, true), l(h, false)],
        [l(f, false), l(high, false), l(h, true)],
        [l(f, false), l(high, true), l(h, false)],
    ])
}

/// `D_{g'} = A_{g+f} + A_f`, with `g` the extension of the one-bit `g'` read at
/// domain bit `pos` of `A`.
pub fn consistency_clauses(a: &FoldedTable, d: &FoldedTable, f: u32, g_prime: u32, pos: u32) -> [Clause; 4] {
    let g = a.basis.space.lift_single(g_prime, pos);
    let l = |x: u32, p: bool| a.literal(x, p);
    let dl = |p: bool| d.literal(g_prime, p);
    clauses([
        [l(f, false), l(g ^ f, false), dl(false)],
        [l(f, false), l(g ^ f, true), dl(true)],
        [l(f, true), l(g ^ f, false), dl(true)],
        [l(f, true), l(g ^ f, true), dl(false)],
    ])
}

/// Relative share of the three tests in each query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TestMix {
    pub linearity: u32,
    pub product: u32,
    pub consistency: u32,
}

impl Default for TestMix {
    fn default() -> Self {
        TestMix { linearity: 3, product: 4, consistency: 3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct VerifierParams {
    pub mix: TestMix,
    /// Sampled queries draw `mix · tests_per_unit` tests of each kind.
    pub tests_per_unit: u32,
    pub seed: u64,
}

impl Default for VerifierParams {
    fn default() -> Self {
        VerifierParams { mix: TestMix::default(), tests_per_unit: 1, seed: 0 }
    }
}

/// Upper bound on the variables of a verifier formula.
const MAX_VERIFIER_VARS: u64 = 1 << 26;

#[derive(Clone, Debug)]
struct EdgeTable {
    domain: Vec<u32>,
    table: FoldedTable,
    dependent: bool,
}

/// The inner verifier as a weighted 3CNF over folded long-code tables: one
/// table per hyperedge (over its distinct vertices) and one per vertex.
#[derive(Clone, Debug)]
pub struct Verifier {
    pub formula: CnfFormula,
    pub exhaustive_queries: usize,
    pub sampled_queries: usize,
    /// Queries answered by always-true placeholders (dependent folding basis).
    pub placeholder_queries: usize,
    edges: Vec<EdgeTable>,
    vertices: FoldedTable,
    vertex_count: u32,
}

/// Distinct vertices in first-occurrence order.
fn domain(vs: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::new();
    for &v in vs {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Queries pick an edge (by weight) and one of its domain bits; each query
/// carries `mix` shares of linearity, product and consistency tests, four
/// clauses per test. Domains of at most 2 bits enumerate every test; larger
/// ones sample from a stream keyed by the query. Edge tables are folded over
/// `(1, 1), (h, b)` for the constraint `h + b = 0`; when `h = 0` the query
/// emits tautologies of the same shape.
pub fn build_verifier_formula(h: &ConstraintHypergraph, params: &VerifierParams) -> Result<Verifier> {
    if h.alphabet_bits != 1 {
        return Err(Error::InvalidParameter(format!("alphabet must be F2, got {} bits", h.alphabet_bits)));
    }
    if params.tests_per_unit == 0 {
        return Err(Error::InvalidParameter("tests per unit must be positive".into()));
    }
    let mut reps_cache: HashMap<(u32, u32), Arc<Vec<u32>>> = HashMap::new();
    let mut edges = Vec::with_capacity(h.edge_count());
    let mut next_var: u64 = 1;
    for (e, (vs, c)) in h.edges.iter().zip(&h.constraints).enumerate() {
        let dom = domain(vs);
        if dom.is_empty() || dom.len() as u32 > MAX_DOMAIN_BITS {
            return Err(Error::SizeCap(format!("edge {e} depends on {} bits", dom.len())));
        }
        let polys = c.polys().ok_or(Error::NotRestricted(e))?;
        if polys.len() > 1 {
            return Err(Error::NotRestricted(e));
        }
        let space = FunctionSpace::new(dom.len() as u32)?;
        let (hom, b) = match polys.first() {
            Some(p) => (p.homogeneous_part(), p.constant_term()),
            None => (Default::default(), false),
        };
        let at: Vec<u32> = vs.iter().map(|v| dom.iter().position(|d| d == v).unwrap() as u32).collect();
        let hf = space.from_fn(|x| hom.eval(|co| (x >> at[co.slot as usize]) & 1 == 1));
        let dependent = hf == 0 || hf == space.one();
        let basis = if dependent {
            FoldingBasis::over_true(space)
        } else {
            FoldingBasis::new(space, vec![(space.one(), true), (hf, b)])?
        };
        let key = (space.n(), if dependent { 0 } else { hf });
        let reps = reps_cache.entry(key).or_insert_with(|| Arc::new(basis.representatives())).clone();
        let table = FoldedTable::with_reps(basis, next_var as u32, reps);
        next_var += table.var_count() as u64;
        if next_var > MAX_VERIFIER_VARS {
            return Err(Error::SizeCap(format!("verifier needs more than {MAX_VERIFIER_VARS} variables")));
        }
        edges.push(EdgeTable { domain: dom, table, dependent });
    }
    let one_bit = FunctionSpace::new(1)?;
    let vertex_table = FoldedTable::new(FoldingBasis::over_true(one_bit), next_var as u32);
    let total_vars = next_var - 1 + h.vertex_count as u64 * vertex_table.var_count() as u64;
    if total_vars > MAX_VERIFIER_VARS {
        return Err(Error::SizeCap(format!("verifier needs {total_vars} variables")));
    }
    let d_table = |v: u32| FoldedTable { first_var: vertex_table.first_var + v * vertex_table.var_count(), ..vertex_table.clone() };
    let mix = params.mix;
    let per_edge: Vec<(Vec<Clause>, bool)> = edges
        .par_iter()
        .enumerate()
        .map(|(e, et)| {
            let space = et.table.basis.space;
            let exhaustive = space.n() <= 2;
            let mut out = Vec::new();
            for pos in 0..space.n() {
                let d = d_table(et.domain[pos as usize]);
                let mut groups: [Vec<[Clause; 4]>; 3] = Default::default();
                if exhaustive {
                    for f in space.functions() {
                        for g in space.functions() {
                            groups[0].push(linearity_clauses(&et.table, f, g));
                            for hh in space.functions() {
                                groups[1].push(product_clauses(&et.table, f, g, hh));
                            }
                        }
                        for g in one_bit.functions() {
                            groups[2].push(consistency_clauses(&et.table, &d, f, g, pos));
                        }
                    }
                } else {
                    let mut rng = seed::stream(&format!("verifier/{e}/{pos}"), params.seed);
                    let size = space.size() as u32;
                    let s = params.tests_per_unit;
                    for _ in 0..mix.linearity * s {
                        groups[0].push(linearity_clauses(&et.table, rng.gen_range(0..size), rng.gen_range(0..size)));
                    }
                    for _ in 0..mix.product * s {
                        let (f, g, hh) = (rng.gen_range(0..size), rng.gen_range(0..size), rng.gen_range(0..size));
                        groups[1].push(product_clauses(&et.table, f, g, hh));
                    }
                    for _ in 0..mix.consistency * s {
                        groups[2].push(consistency_clauses(&et.table, &d, rng.gen_range(0..size), rng.gen_range(0..4), pos));
                    }
                }
                let shares = [mix.linearity, mix.product, mix.consistency];
                for (group, share) in groups.into_iter().zip(shares) {
                    if group.is_empty() || share == 0 {
                        continue;
                    }
                    let w = Weight::new(
                        h.weights[e] as i64 * share as i64,
                        space.n() as i64 * 4 * group.len() as i64,
                    );
                    for quad in group {
                        for mut c in quad {
                            if et.dependent {
                                let l = c.lits[0];
                                c.lits = vec![l, !l, l];
                            }
                            c.weight = w;
                            out.push(c);
                        }
                    }
                }
            }
            (out, exhaustive)
        })
        .collect();
    let mut all = Vec::new();
    let (mut exhaustive_queries, mut sampled_queries, mut placeholder_queries) = (0, 0, 0);
    for ((clauses, exhaustive), et) in per_edge.into_iter().zip(&edges) {
        let q = et.domain.len();
        if exhaustive {
            exhaustive_queries += q;
        } else {
            sampled_queries += q;
        }
        if et.dependent {
            placeholder_queries += q;
        }
        all.extend(clauses);
    }
    let formula = CnfFormula::new(total_vars as u32, Kind::Sat, all)?;
    Ok(Verifier {
        formula,
        exhaustive_queries,
        sampled_queries,
        placeholder_queries,
        edges,
        vertices: vertex_table,
        vertex_count: h.vertex_count,
    })
}

impl Verifier {
    /// Honest long codes of an assignment of the hypergraph.
    pub fn lift(&self, a: &HyperAssignment) -> Vec<bool> {
        let mut x = vec![false; self.formula.n() as usize];
        for et in &self.edges {
            let point = et.domain.iter().enumerate().fold(0u32, |acc, (i, &v)| acc | ((a.get(v, 0) as u32) << i));
            for (i, &r) in et.table.representatives().iter().enumerate() {
                x[(et.table.first_var + i as u32 - 1) as usize] = et.table.basis.space.eval(r, point);
            }
        }
        let k = self.vertices.var_count();
        for v in 0..self.vertex_count {
            let point = a.get(v, 0) as u32;
            for (i, &r) in self.vertices.representatives().iter().enumerate() {
                x[(self.vertices.first_var + v * k + i as u32 - 1) as usize] = self.vertices.basis.space.eval(r, point);
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::super::word::{encode_long_code, LongCodeWord};
    use super::*;
    use crate::csp::{Constraint, Coord, Gf2Poly, Monomial};

    fn table_assignment(t: &FoldedTable, word: &LongCodeWord, extra: u32) -> Vec<bool> {
        let mut x = vec![false; (t.first_var - 1 + t.var_count() + extra) as usize];
        for (i, &r) in t.representatives().iter().enumerate() {
            x[(t.first_var + i as u32 - 1) as usize] = word.get(r);
        }
        x
    }

    #[test]
    fn linearity_clause_literals() {
        let s = FunctionSpace::new(2).unwrap();
        let t = FoldedTable::new(FoldingBasis::empty(s), 1);
        let q = linearity_clauses(&t, 3, 5);
        // Without folding, variable of f is f + 1.
        let lits: Vec<Vec<i64>> = q.iter().map(|c| c.lits.iter().map(|l| l.to_dimacs()).collect()).collect();
        assert_eq!(lits, vec![vec![-4, -6, -7], vec![-4, 6, 7], vec![4, -6, 7], vec![4, 6, -7]]);
    }

    #[test]
    fn honest_tables_pass_every_test() {
        let s = FunctionSpace::new(2).unwrap();
        for x in 0..4u32 {
            for h in 1..15u32 {
                let b = s.eval(h, x);
                let basis = FoldingBasis::new(s, vec![(s.one(), true), (h, b)]).unwrap();
                let a = FoldedTable::new(basis, 1);
                let d = FoldedTable::new(FoldingBasis::over_true(FunctionSpace::new(1).unwrap()), 1 + a.var_count());
                let lc = encode_long_code(2, x).unwrap();
                let mut assign = table_assignment(&a, &lc, d.var_count());
                for (i, &r) in d.representatives().iter().enumerate() {
                    assign[(d.first_var + i as u32 - 1) as usize] = encode_long_code(1, x & 1).unwrap().get(r);
                }
                for f in s.functions() {
                    for g in s.functions() {
                        assert!(linearity_clauses(&a, f, g).iter().all(|c| c.eval(Kind::Sat, &assign)));
                        assert!(product_clauses(&a, f, g, f ^ 6).iter().all(|c| c.eval(Kind::Sat, &assign)));
                    }
                    for g in 0..4 {
                        assert!(consistency_clauses(&a, &d, f, g, 0).iter().all(|c| c.eval(Kind::Sat, &assign)));
                    }
                }
            }
        }
    }

    fn rank4_hypergraph(b: bool) -> ConstraintHypergraph {
        let mut h = ConstraintHypergraph::new(5, 1);
        let c = |s| Coord::new(s, 0);
        let p = Gf2Poly::new(vec![Monomial::Linear(c(0)), Monomial::Linear(c(1)), Monomial::product(c(2), c(3))], b);
        h.add_edge(vec![0, 1, 2, 3], Constraint::Restricted(vec![p]));
        h.add_edge(vec![3, 4], Constraint::Restricted(vec![Gf2Poly::equality(c(0), c(1), b)]));
        h.add_edge(vec![4, 4, 0], Constraint::Restricted(vec![Gf2Poly::linear(c(2)).add_constant(b)]));
        h
    }

    #[test]
    fn satisfiable_hypergraph_gives_satisfiable_formula() {
        let h = rank4_hypergraph(false);
        let v = build_verifier_formula(&h, &VerifierParams::default()).unwrap();
        // x0 + x1 + x2·x3 = 0, x3 = x4, x0 = 0.
        let a = HyperAssignment::from_values(1, &[0, 1, 1, 1, 1]);
        assert!(h.is_satisfied_by(&a));
        assert!(v.formula.is_satisfied_by(&v.lift(&a)));
        assert_eq!(v.formula.max_arity(), 3);
        assert_eq!(v.exhaustive_queries, 4);
        assert_eq!(v.sampled_queries, 4);
    }

    #[test]
    fn close_hypergraphs_same_factor_graph() {
        let a = build_verifier_formula(&rank4_hypergraph(false), &VerifierParams::default()).unwrap();
        let b = build_verifier_formula(&rank4_hypergraph(true), &VerifierParams::default()).unwrap();
        assert_eq!(a.formula.factor_graph(), b.formula.factor_graph());
        assert_ne!(a.formula, b.formula);
    }

    #[test]
    fn mix_shares_per_query() {
        let h = rank4_hypergraph(false);
        let p = VerifierParams { tests_per_unit: 2, ..VerifierParams::default() };
        let v = build_verifier_formula(&h, &p).unwrap();
        // Edge 0 is sampled: per bit 3·2 + 4·2 + 3·2 tests of 4 clauses.
        let first_edge = 4 * 4 * 20;
        let clauses = &v.formula.clauses()[..first_edge];
        let total: Weight = clauses.iter().map(|c| c.weight).sum();
        let lin: Weight = clauses.iter().take(4 * 6).map(|c| c.weight).sum();
        assert_eq!(total, Weight::from_integer(10));
        // One query is a quarter of the edge; its linearity share is 3/10 of that.
        assert_eq!(lin * 40, total * 3);
    }
}
