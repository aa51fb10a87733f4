use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::RngCore;
use rayon::prelude::*;

use super::regularize::check_rank_two;
use super::{Mode, EXHAUSTIVE_EDGE_CAP};
use crate::csp::{Constraint, ConstraintHypergraph, Coord, Gf2Poly, HyperAssignment, Monomial};
use crate::{seed, Error, Result};

/// What a vertex of the reduced hypergraph stands for. Linear functions are
/// bit masks over the input bits; quadratic functions are bit sets over the
/// pairs `i < j` of the `2k` edge bits (pair order: `(0,1), (0,2), …, (1,2), …`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ReducedVertex {
    /// `v(L)`, `L` over the `k` bits of vertex `v`.
    Linear { vertex: u32, mask: u64 },
    /// `e(L)`, `L` over the `2k` bits of edge `e` (first endpoint's bits first).
    EdgeLinear { edge: u32, mask: u64 },
    /// `e(q)` for a homogeneous quadratic `q` over the `2k` bits of edge `e`.
    EdgeQuadratic { edge: u32, pairs: Vec<u64> },
}

/// A 1-restricted rank-4 hypergraph over F₂ together with vertex labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphabetReduced {
    pub hypergraph: ConstraintHypergraph,
    pub labels: Vec<ReducedVertex>,
    pub input_bits: u32,
}

struct Pairs {
    width: u32,
    count: u32,
}

impl Pairs {
    fn new(k: u32) -> Self {
        let width = 2 * k;
        Pairs { width, count: width * (width - 1) / 2 }
    }

    fn index(&self, i: u32, j: u32) -> u32 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        // pairs before row i: sum over r < i of (width - 1 - r)
        i * (2 * self.width - i - 1) / 2 + (j - i - 1)
    }

    fn words(&self) -> usize {
        (self.count as usize).div_ceil(64).max(1)
    }
}

fn flip(set: &mut [u64], i: u32) {
    set[i as usize / 64] ^= 1 << (i % 64);
}

fn xor(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// One parameter tuple `(e, L1, L2, L3, L4, q1, q2, w)`.
struct Tuple {
    edge: u32,
    l1: u64,
    l2: u64,
    l3: u64,
    l4: u64,
    q1: Vec<u64>,
    q2: Vec<u64>,
    w: u64,
}

/// Combined polynomial of an edge under selector `w`, as a quadratic pair set,
/// a linear mask over the `2k` edge bits, and a constant.
fn combined(polys: &[Gf2Poly], w: u64, k: u32, pairs: &Pairs) -> (Vec<u64>, u64, bool) {
    let mut quad = vec![0u64; pairs.words()];
    let mut lin = 0u64;
    let mut constant = false;
    let flat = |c: Coord| c.slot * k + c.bit;
    for (i, p) in polys.iter().enumerate() {
        if (w >> i) & 1 == 0 {
            continue;
        }
        constant ^= p.constant_term();
        for m in p.monomials() {
            match *m {
                Monomial::Linear(c) => lin ^= 1 << flat(c),
                Monomial::Quadratic(a, b) => {
                    let (x, y) = (flat(a), flat(b));
                    if x == y {
                        lin ^= 1 << x;
                    } else {
                        flip(&mut quad, pairs.index(x, y));
                    }
                }
            }
        }
    }
    (quad, lin, constant)
}

/// Sum of the given slots equals the polynomial's remaining terms; builds one
/// 1-restricted constraint from a list of linear slot terms, optional product
/// of slots, and a constant.
fn linear_check(slots: usize, product: Option<(u32, u32)>, constant: bool) -> Constraint {
    let mut ms: Vec<Monomial> = (0..slots as u32).map(|s| Monomial::Linear(Coord::new(s, 0))).collect();
    if let Some((a, b)) = product {
        ms.push(Monomial::product(Coord::new(a, 0), Coord::new(b, 0)));
    }
    Constraint::Restricted(vec![Gf2Poly::new(ms, constant)])
}

/// Reduces a rank-2 constraint graph whose edges carry at most `m` polynomials
/// over `F₂^k` to a 1-restricted rank-4 hypergraph over F₂, seven constraints
/// per parameter tuple. Exhaustive mode gives each emitted edge the weight of
/// its source edge; sample mode draws source edges proportionally to weight.
///
/// Type 6 uses `L4' = L4 ∧ ¬L3` so the product `L3·L4'` has no square terms and
/// stays a homogeneous quadratic. Type 7 separates the combined polynomial
/// into its quadratic part `Pq` and linear part `Pl` and checks
/// `e(q1 + Pq) + e(q1) + e(Pl) + b = 0`.
pub fn alphabet_reduce(g: &ConstraintHypergraph, mode: Mode) -> Result<AlphabetReduced> {
    check_rank_two(g)?;
    let m = g.restriction()? as u32;
    let k = g.alphabet_bits;
    if k == 0 || 2 * k > 64 || m > 63 {
        return Err(Error::SizeCap(format!("alphabet of {k} bits with {m} polynomials per edge")));
    }
    let pairs = Pairs::new(k);
    let mut ids = Ids::new(g, &pairs, mode)?;
    let tuples: Vec<Tuple> = match mode {
        Mode::Exhaustive => {
            let bits = m + 6 * k + 2 * pairs.count;
            let total = 7u64.checked_shl(bits).filter(|t| t >> bits == 7).and_then(|t| t.checked_mul(g.edge_count() as u64));
            match total {
                Some(t) if t <= EXHAUSTIVE_EDGE_CAP => {}
                _ => return Err(Error::SizeCap(format!("7·|E|·2^{bits} edges in exhaustive mode"))),
            }
            let mut out = Vec::new();
            let (lk, l2k, qk, wk) = (1u64 << k, 1u64 << (2 * k), 1u64 << pairs.count, 1u64 << m);
            for edge in 0..g.edge_count() as u32 {
                for l1 in 0..lk {
                    for l2 in 0..lk {
                        for l3 in 0..l2k {
                            for l4 in 0..l2k {
                                for q1 in 0..qk {
                                    for q2 in 0..qk {
                                        for w in 0..wk {
                                            out.push(Tuple { edge, l1, l2, l3, l4, q1: vec![q1], q2: vec![q2], w });
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            out
        }
        Mode::Sample { count, seed } => {
            if g.edge_count() == 0 {
                Vec::new()
            } else {
                let mut rng = seed::stream("alphabet", seed);
                let pick = WeightedIndex::new(&g.weights).map_err(|e| Error::InvalidParameter(format!("edge weights: {e}")))?;
                let mask = |bits: u32| if bits >= 64 { u64::MAX } else { (1u64 << bits) - 1 };
                let quad = |rng: &mut rand_chacha::ChaCha8Rng| {
                    let mut q: Vec<u64> = (0..pairs.words()).map(|_| rng.next_u64()).collect();
                    let tail = pairs.count % 64;
                    if tail != 0 {
                        *q.last_mut().unwrap() &= mask(tail);
                    }
                    if pairs.count == 0 {
                        q[0] = 0;
                    }
                    q
                };
                (0..count)
                    .map(|_| {
                        let edge = pick.sample(&mut rng) as u32;
                        let l1 = rng.next_u64() & mask(k);
                        let l2 = rng.next_u64() & mask(k);
                        let l3 = rng.next_u64() & mask(2 * k);
                        let l4 = rng.next_u64() & mask(2 * k);
                        let q1 = quad(&mut rng);
                        let q2 = quad(&mut rng);
                        let w = rng.next_u64() & mask(m);
                        Tuple { edge, l1, l2, l3, l4, q1, q2, w }
                    })
                    .collect()
            }
        }
    };

    let combos: Vec<(Vec<u64>, u64, bool)> = tuples
        .par_iter()
        .map(|t| combined(g.constraints[t.edge as usize].polys().expect("restricted"), t.w, k, &pairs))
        .collect();
    let mut h = ConstraintHypergraph::new(0, 1);
    let exhaustive = matches!(mode, Mode::Exhaustive);
    for (t, (pq, pl, b)) in tuples.iter().zip(combos) {
        let e = t.edge;
        let weight = if exhaustive { g.weights[e as usize] } else { 1 };
        let add = |h: &mut ConstraintHypergraph, vs: Vec<u32>, c: Constraint| {
            h.add_weighted_edge(vs, c, weight);
        };
        let (u, v) = (g.edges[e as usize][0], g.edges[e as usize][1]);
        let lin = |ids: &mut Ids, vertex, mask| ids.get(ReducedVertex::Linear { vertex, mask });
        let el = |ids: &mut Ids, mask| ids.get(ReducedVertex::EdgeLinear { edge: e, mask });
        let eq = |ids: &mut Ids, pairs: Vec<u64>| ids.get(ReducedVertex::EdgeQuadratic { edge: e, pairs });
        // 1, 2: linearity of each endpoint's table.
        let vs = vec![lin(&mut ids, u, t.l1), lin(&mut ids, u, t.l2), lin(&mut ids, u, t.l1 ^ t.l2)];
        add(&mut h, vs, linear_check(3, None, false));
        let vs = vec![lin(&mut ids, v, t.l1), lin(&mut ids, v, t.l2), lin(&mut ids, v, t.l1 ^ t.l2)];
        add(&mut h, vs, linear_check(3, None, false));
        // 3: linearity of the edge's linear table.
        let vs = vec![el(&mut ids, t.l3), el(&mut ids, t.l4), el(&mut ids, t.l3 ^ t.l4)];
        add(&mut h, vs, linear_check(3, None, false));
        // 4: linearity of the edge's quadratic table.
        let vs = vec![eq(&mut ids, t.q1.clone()), eq(&mut ids, t.q2.clone()), eq(&mut ids, xor(&t.q1, &t.q2))];
        add(&mut h, vs, linear_check(3, None, false));
        // 5: the edge's linear table agrees with both endpoints.
        let joint = t.l1 | (t.l2 << k);
        let vs = vec![lin(&mut ids, u, t.l1), lin(&mut ids, v, t.l2), el(&mut ids, joint)];
        add(&mut h, vs, linear_check(3, None, false));
        // 6: quadratic table consistent with products of linear ones.
        let l4 = t.l4 & !t.l3;
        let mut prod = t.q1.clone();
        for i in 0..2 * k {
            if (t.l3 >> i) & 1 == 1 {
                for j in 0..2 * k {
                    if (l4 >> j) & 1 == 1 {
                        flip(&mut prod, pairs.index(i, j));
                    }
                }
            }
        }
        let vs = vec![eq(&mut ids, t.q1.clone()), eq(&mut ids, prod), el(&mut ids, t.l3), el(&mut ids, l4)];
        add(&mut h, vs, linear_check(2, Some((2, 3)), false));
        // 7: the selected combination of the edge's polynomials vanishes.
        let vs = vec![eq(&mut ids, t.q1.clone()), eq(&mut ids, xor(&t.q1, &pq)), el(&mut ids, pl)];
        add(&mut h, vs, linear_check(3, None, b));
    }
    h.vertex_count = ids.count();
    let labels = ids.into_labels(g, &pairs);
    Ok(AlphabetReduced { hypergraph: h, labels, input_bits: k })
}

/// Vertex numbering: dense closed-form ids in exhaustive mode, first-reference
/// order in sample mode.
enum Ids {
    Dense { k: u32, pair_bits: u32, vertices: u32, edges: u32 },
    Lazy { map: HashMap<ReducedVertex, u32>, order: Vec<ReducedVertex> },
}

impl Ids {
    fn new(g: &ConstraintHypergraph, pairs: &Pairs, mode: Mode) -> Result<Ids> {
        Ok(match mode {
            Mode::Exhaustive => {
                let k = g.alphabet_bits;
                let per_vertex = 1u64 << k;
                let per_edge = (1u64 << (2 * k)).saturating_add(1u64.checked_shl(pairs.count).unwrap_or(u64::MAX));
                let total = per_vertex
                    .saturating_mul(g.vertex_count as u64)
                    .saturating_add(per_edge.saturating_mul(g.edge_count() as u64));
                if total > u32::MAX as u64 || pairs.count > 32 {
                    return Err(Error::SizeCap(format!("{total} vertices in exhaustive mode")));
                }
                Ids::Dense { k, pair_bits: pairs.count, vertices: g.vertex_count, edges: g.edge_count() as u32 }
            }
            Mode::Sample { .. } => Ids::Lazy { map: HashMap::new(), order: Vec::new() },
        })
    }

    fn get(&mut self, label: ReducedVertex) -> u32 {
        match self {
            Ids::Dense { k, pair_bits, vertices, edges } => {
                let lin_base = *vertices << *k;
                let quad_base = lin_base + (*edges << (2 * *k));
                match label {
                    ReducedVertex::Linear { vertex, mask } => (vertex << *k) + mask as u32,
                    ReducedVertex::EdgeLinear { edge, mask } => lin_base + (edge << (2 * *k)) + mask as u32,
                    ReducedVertex::EdgeQuadratic { edge, pairs } => quad_base + (edge << *pair_bits) + pairs[0] as u32,
                }
            }
            Ids::Lazy { map, order } => *map.entry(label).or_insert_with_key(|l| {
                order.push(l.clone());
                order.len() as u32 - 1
            }),
        }
    }

    fn count(&self) -> u32 {
        match self {
            Ids::Dense { k, pair_bits, vertices, edges } => {
                (*vertices << *k) + (*edges << (2 * *k)) + (*edges << *pair_bits)
            }
            Ids::Lazy { order, .. } => order.len() as u32,
        }
    }

    fn into_labels(self, g: &ConstraintHypergraph, pairs: &Pairs) -> Vec<ReducedVertex> {
        match self {
            Ids::Dense { k, .. } => {
                let mut out = Vec::new();
                for vertex in 0..g.vertex_count {
                    out.extend((0..1u64 << k).map(|mask| ReducedVertex::Linear { vertex, mask }));
                }
                for edge in 0..g.edge_count() as u32 {
                    out.extend((0..1u64 << (2 * k)).map(|mask| ReducedVertex::EdgeLinear { edge, mask }));
                }
                for edge in 0..g.edge_count() as u32 {
                    out.extend((0..1u64 << pairs.count).map(|q| ReducedVertex::EdgeQuadratic { edge, pairs: vec![q] }));
                }
                out
            }
            Ids::Lazy { order, .. } => order,
        }
    }
}

impl AlphabetReduced {
    /// Hadamard and quadratic codes of a satisfying assignment of the input.
    pub fn lift(&self, g: &ConstraintHypergraph, a: &HyperAssignment) -> HyperAssignment {
        let k = self.input_bits;
        let pairs = Pairs::new(k);
        let parity = |x: u64| x.count_ones() % 2 == 1;
        let values: Vec<u64> = self
            .labels
            .par_iter()
            .map(|label| match label {
                ReducedVertex::Linear { vertex, mask } => parity(a.value(*vertex) & mask) as u64,
                ReducedVertex::EdgeLinear { edge, mask } => {
                    let vs = &g.edges[*edge as usize];
                    let x = a.value(vs[0]) | (a.value(vs[1]) << k);
                    parity(x & mask) as u64
                }
                ReducedVertex::EdgeQuadratic { edge, pairs: set } => {
                    let vs = &g.edges[*edge as usize];
                    let x = a.value(vs[0]) | (a.value(vs[1]) << k);
                    let mut acc = false;
                    for i in 0..2 * k {
                        for j in i + 1..2 * k {
                            let p = pairs.index(i, j);
                            if (set[p as usize / 64] >> (p % 64)) & 1 == 1 {
                                acc ^= (x >> i) & (x >> j) & 1 == 1;
                            }
                        }
                    }
                    acc as u64
                }
            })
            .collect();
        HyperAssignment::from_values(1, &values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::is_close;

    fn single_edge(k: u32, polys: Vec<Gf2Poly>) -> ConstraintHypergraph {
        let mut g = ConstraintHypergraph::new(2, k);
        g.add_edge(vec![0, 1], Constraint::Restricted(polys));
        g
    }

    #[test]
    fn pair_indexing_is_dense() {
        let p = Pairs::new(3);
        let mut seen = vec![false; p.count as usize];
        for i in 0..6 {
            for j in i + 1..6 {
                let idx = p.index(i, j) as usize;
                assert!(!seen[idx]);
                seen[idx] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn exhaustive_counts_for_k1() {
        let g = single_edge(1, vec![Gf2Poly::product(Coord::new(0, 0), Coord::new(1, 0))]);
        let r = alphabet_reduce(&g, Mode::Exhaustive).unwrap();
        assert_eq!(r.hypergraph.vertex_count, 2 * 2 + (4 + 2));
        // m = 1, k = 1: 7 · 2^(1 + 6 + 2)
        assert_eq!(r.hypergraph.edge_count(), 7 * (1 << 9));
        assert_eq!(r.hypergraph.rank(), 4);
        assert_eq!(r.hypergraph.restriction().unwrap(), 1);
        r.hypergraph.validate().unwrap();
    }

    #[test]
    fn honest_codes_satisfy_everything() {
        let eq = Gf2Poly::equality(Coord::new(0, 0), Coord::new(1, 1), true);
        let q = Gf2Poly::new(vec![Monomial::product(Coord::new(0, 1), Coord::new(1, 0)), Monomial::Linear(Coord::new(0, 0))], false);
        let g = single_edge(2, vec![eq, q]);
        for (xu, xv) in (0..4u64).flat_map(|a| (0..4u64).map(move |b| (a, b))) {
            let a = HyperAssignment::from_values(2, &[xu, xv]);
            if !g.is_satisfied_by(&a) {
                continue;
            }
            let r = alphabet_reduce(&g, Mode::Sample { count: 300, seed: 5 }).unwrap();
            assert!(r.hypergraph.is_satisfied_by(&r.lift(&g, &a)));
        }
    }

    #[test]
    fn honest_codes_exhaustive_k1() {
        let g = single_edge(1, vec![Gf2Poly::equality(Coord::new(0, 0), Coord::new(1, 0), true)]);
        let r = alphabet_reduce(&g, Mode::Exhaustive).unwrap();
        let a = HyperAssignment::from_values(1, &[1, 0]);
        assert!(r.hypergraph.is_satisfied_by(&r.lift(&g, &a)));
        let bad = HyperAssignment::from_values(1, &[1, 1]);
        assert!(!r.hypergraph.is_satisfied_by(&r.lift(&g, &bad)));
    }

    #[test]
    fn close_inputs_differ_only_in_constants() {
        let p = Gf2Poly::equality(Coord::new(0, 0), Coord::new(1, 0), false);
        let g = single_edge(1, vec![p.clone()]);
        let g2 = single_edge(1, vec![p.add_constant(true)]);
        for mode in [Mode::Exhaustive, Mode::Sample { count: 100, seed: 9 }] {
            let a = alphabet_reduce(&g, mode).unwrap();
            let b = alphabet_reduce(&g2, mode).unwrap();
            assert!(is_close(&a.hypergraph, &b.hypergraph).unwrap());
            let differing: Vec<usize> = (0..a.hypergraph.edge_count())
                .filter(|&e| a.hypergraph.constraints[e] != b.hypergraph.constraints[e])
                .collect();
            assert!(!differing.is_empty());
            assert!(differing.iter().all(|e| e % 7 == 6));
        }
    }
}
