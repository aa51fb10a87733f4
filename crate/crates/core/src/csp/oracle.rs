use std::sync::atomic::{AtomicBool, Ordering};

use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;

use super::formula::{CnfFormula, Kind, Weight};
use super::hypergraph::{to_ratio, Constraint, ConstraintHypergraph, TruthTable};
use super::poly::{Gf2Poly, Monomial};
use crate::{Error, Result};

/// Default limit on the number of assignments the exhaustive oracle visits.
pub const DEFAULT_ORACLE_CAP: u64 = 1 << 24;

/// A constraint system that can be lowered to weighted checks over a flat
/// bit vector. For formulas bit `i` is variable `i + 1`; for hypergraphs bit
/// `v * k + b` is bit `b` of vertex `v`.
pub trait Unsat {
    fn compile(&self) -> Result<Compiled>;
}

impl Unsat for CnfFormula {
    fn compile(&self) -> Result<Compiled> {
        let mut lcm = 1i64;
        for c in self.clauses() {
            lcm = lcm.lcm(c.weight.denom());
        }
        let mut checks = Vec::with_capacity(self.m());
        for c in self.clauses() {
            let w = c.weight.numer().checked_mul(lcm / c.weight.denom()).ok_or(Error::Overflow("clause weights"))?;
            let mut lits: Vec<(u32, bool)> = c.lits.iter().map(|l| (l.var - 1, l.negated)).collect();
            let check = match self.kind() {
                Kind::Sat => Check::Sat(lits),
                Kind::Nae => Check::Nae(lits),
                Kind::Lin => {
                    let parity = lits.iter().filter(|l| l.1).count() % 2 == 1;
                    lits.sort_unstable();
                    Check::Lin(cancel_pairs(lits.into_iter().map(|l| l.0).collect()), parity)
                }
            };
            checks.push((check, w as u64));
        }
        Compiled::new(self.n() as u64, checks)
    }
}

impl Unsat for ConstraintHypergraph {
    fn compile(&self) -> Result<Compiled> {
        self.validate()?;
        let k = self.alphabet_bits;
        let global = |v: u32, b: u32| v * k + b;
        let mut checks = Vec::with_capacity(self.edge_count());
        for ((vs, c), &w) in self.edges.iter().zip(&self.constraints).zip(&self.weights) {
            let check = match c {
                Constraint::Restricted(ps) => Check::Polys(
                    ps.iter()
                        .map(|p| CompiledPoly::lower(p, |slot, bit| global(vs[slot as usize], bit)))
                        .collect(),
                ),
                Constraint::Table(t) => Check::Table(
                    vs.iter().flat_map(|&v| (0..k).map(move |b| global(v, b))).collect(),
                    t.clone(),
                ),
            };
            checks.push((check, w));
        }
        let bits = self.vertex_count as u64 * k as u64;
        Compiled::new(bits, checks)
    }
}

fn cancel_pairs(mut sorted: Vec<u32>) -> Vec<u32> {
    sorted.sort_unstable();
    let mut out: Vec<u32> = Vec::with_capacity(sorted.len());
    for x in sorted {
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledPoly {
    linear: Vec<u32>,
    quadratic: Vec<(u32, u32)>,
    constant: bool,
}

impl CompiledPoly {
    fn lower(p: &Gf2Poly, global: impl Fn(u32, u32) -> u32) -> Self {
        let mut linear = Vec::new();
        let mut quadratic = Vec::new();
        for m in p.monomials() {
            match *m {
                Monomial::Linear(c) => linear.push(global(c.slot, c.bit)),
                Monomial::Quadratic(a, b) => {
                    let (x, y) = (global(a.slot, a.bit), global(b.slot, b.bit));
                    if x == y {
                        linear.push(x);
                    } else {
                        quadratic.push((x.min(y), x.max(y)));
                    }
                }
            }
        }
        quadratic.sort_unstable();
        let mut q: Vec<(u32, u32)> = Vec::with_capacity(quadratic.len());
        for pair in quadratic {
            if q.last() == Some(&pair) {
                q.pop();
            } else {
                q.push(pair);
            }
        }
        CompiledPoly { linear: cancel_pairs(linear), quadratic: q, constant: p.constant_term() }
    }

    fn eval(&self, get: &impl Fn(u32) -> bool) -> bool {
        let mut acc = self.constant;
        for &i in &self.linear {
            acc ^= get(i);
        }
        for &(a, b) in &self.quadratic {
            acc ^= get(a) && get(b);
        }
        acc
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Check {
    Sat(Vec<(u32, bool)>),
    Nae(Vec<(u32, bool)>),
    Lin(Vec<u32>, bool),
    Polys(Vec<CompiledPoly>),
    Table(Vec<u32>, TruthTable),
}

impl Check {
    pub(crate) fn eval(&self, get: &impl Fn(u32) -> bool) -> bool {
        match self {
            Check::Sat(lits) => lits.iter().any(|&(v, neg)| get(v) != neg),
            Check::Nae(lits) => {
                let t = lits.iter().any(|&(v, neg)| get(v) != neg);
                let f = lits.iter().any(|&(v, neg)| get(v) == neg);
                t && f
            }
            Check::Lin(bits, parity) => bits.iter().fold(*parity, |acc, &v| acc ^ get(v)),
            Check::Polys(ps) => ps.iter().all(|p| !p.eval(get)),
            Check::Table(bits, t) => {
                let index = bits.iter().enumerate().fold(0u64, |acc, (i, &v)| acc | ((get(v) as u64) << i));
                t.get(index)
            }
        }
    }

    pub(crate) fn bits(&self) -> Vec<u32> {
        let mut out: Vec<u32> = match self {
            Check::Sat(lits) | Check::Nae(lits) => lits.iter().map(|l| l.0).collect(),
            Check::Lin(bits, _) => bits.clone(),
            Check::Polys(ps) => ps
                .iter()
                .flat_map(|p| p.linear.iter().copied().chain(p.quadratic.iter().flat_map(|&(a, b)| [a, b])))
                .collect(),
            Check::Table(bits, _) => bits.clone(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Weighted checks over a flat bit vector, with integer weights.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub(crate) bits: u64,
    pub(crate) checks: Vec<(Check, u64)>,
    pub(crate) total: u128,
}

impl Compiled {
    fn new(bits: u64, checks: Vec<(Check, u64)>) -> Result<Self> {
        let total = checks.iter().map(|c| c.1 as u128).sum();
        Ok(Compiled { bits, checks, total })
    }

    pub fn bit_count(&self) -> u64 {
        self.bits
    }

    pub(crate) fn violated(&self, get: &impl Fn(u32) -> bool) -> u128 {
        self.checks.iter().filter(|(c, _)| !c.eval(get)).map(|c| c.1 as u128).sum()
    }

    pub(crate) fn fraction(&self, violated: u128) -> Result<Weight> {
        if self.total == 0 {
            // An empty system is trivially satisfied.
            return Ok(Weight::zero());
        }
        to_ratio(violated, self.total)
    }
}

/// Exhaustive enumerator with a cap on the assignment count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Oracle {
    pub cap: u64,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle { cap: DEFAULT_ORACLE_CAP }
    }
}

impl Oracle {
    pub fn with_cap(cap: u64) -> Self {
        Oracle { cap }
    }

    fn space(&self, c: &Compiled) -> Result<u64> {
        if c.bits >= 63 || (1u64 << c.bits) > self.cap {
            return Err(Error::OracleCap { bits: c.bits, cap: self.cap });
        }
        Ok(1u64 << c.bits)
    }

    /// Exact minimum weighted fraction of violated constraints, and a minimizer.
    pub fn minimize(&self, p: &impl Unsat) -> Result<(Weight, u64)> {
        let c = p.compile()?;
        let space = self.space(&c)?;
        let found_zero = AtomicBool::new(false);
        let chunk = 1u64 << 12;
        let (best, arg) = (0..space.div_ceil(chunk))
            .into_par_iter()
            .map(|block| {
                let mut best = (u128::MAX, 0u64);
                if found_zero.load(Ordering::Relaxed) {
                    return best;
                }
                for x in block * chunk..((block + 1) * chunk).min(space) {
                    let v = c.violated(&|i| (x >> i) & 1 == 1);
                    if v < best.0 {
                        best = (v, x);
                        if v == 0 {
                            found_zero.store(true, Ordering::Relaxed);
                            break;
                        }
                    }
                }
                best
            })
            .min()
            .unwrap_or((0, 0));
        let best = if best == u128::MAX { 0 } else { best };
        Ok((c.fraction(best)?, arg))
    }

    pub fn unsat(&self, p: &impl Unsat) -> Result<Weight> {
        self.minimize(p).map(|r| r.0)
    }

    pub fn is_satisfiable(&self, p: &impl Unsat) -> Result<bool> {
        Ok(self.unsat(p)?.is_zero())
    }

    /// Recounts a single assignment given as bit mask; independent of the search path.
    pub fn unsat_of_mask(p: &impl Unsat, x: u64) -> Result<Weight> {
        let c = p.compile()?;
        c.fraction(c.violated(&|i| (x >> i) & 1 == 1))
    }
}

/// `UNSAT(p)` by exhaustive enumeration with the default cap.
pub fn brute_force_unsat(p: &impl Unsat) -> Result<Weight> {
    Oracle::default().unsat(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::formula::{Clause, Literal};
    use crate::csp::ratio;
    use proptest::prelude::*;

    #[test]
    fn contradictory_units() {
        let f = CnfFormula::from_dimacs(1, &[&[1], &[-1]]).unwrap();
        assert_eq!(brute_force_unsat(&f).unwrap(), ratio(1, 2));
    }

    #[test]
    fn satisfiable_is_zero() {
        let f = CnfFormula::from_dimacs(3, &[&[1, 2, 3], &[-1, 2], &[-2, 3]]).unwrap();
        assert_eq!(brute_force_unsat(&f).unwrap(), Weight::zero());
    }

    #[test]
    fn respects_cap() {
        let f = CnfFormula::from_dimacs(30, &[&[1]]).unwrap();
        assert!(matches!(brute_force_unsat(&f), Err(Error::OracleCap { bits: 30, .. })));
    }

    #[test]
    fn weights_and_kinds() {
        let c = |l: &[i64], w| Clause::weighted(l.iter().map(|&x| Literal::from_dimacs(x).unwrap()).collect(), w);
        let f = CnfFormula::new(1, Kind::Sat, vec![c(&[1], ratio(1, 3)), c(&[-1], ratio(2, 3))]).unwrap();
        assert_eq!(brute_force_unsat(&f).unwrap(), ratio(1, 3));
        let nae = CnfFormula::new(2, Kind::Nae, vec![c(&[1, 2], ratio(1, 1)), c(&[1, -2], ratio(1, 1))]).unwrap();
        assert_eq!(brute_force_unsat(&nae).unwrap(), ratio(1, 2));
        let lin = CnfFormula::new(2, Kind::Lin, vec![c(&[1, 1], ratio(1, 1))]).unwrap();
        assert_eq!(brute_force_unsat(&lin).unwrap(), ratio(1, 1));
    }

    fn random_formula(n: u32, m: usize) -> impl Strategy<Value = CnfFormula> {
        let lit = (1..=n, any::<bool>()).prop_map(|(v, s)| Literal::new(v, s));
        prop::collection::vec(prop::collection::vec(lit, 3), m)
            .prop_map(move |cs| CnfFormula::new(n, Kind::Sat, cs.into_iter().map(Clause::new).collect()).unwrap())
    }

    // Independent recount: evaluate clauses straight from the formula value.
    fn recount(f: &CnfFormula) -> Weight {
        (0..1u32 << f.n())
            .map(|x| {
                let a: Vec<bool> = (0..f.n()).map(|i| (x >> i) & 1 == 1).collect();
                f.unsat_weight(&a) / f.total_weight()
            })
            .min()
            .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn matches_independent_recount(f in random_formula(4, 20)) {
            prop_assert_eq!(brute_force_unsat(&f).unwrap(), recount(&f));
        }

        #[test]
        fn invariant_under_reordering_and_scaling(f in random_formula(4, 8), s in 1i64..7) {
            let mut clauses = f.clauses().to_vec();
            clauses.reverse();
            let g = CnfFormula::new(f.n(), f.kind(), clauses).unwrap().with_uniform_weight(ratio(s, 5));
            prop_assert_eq!(brute_force_unsat(&f).unwrap(), brute_force_unsat(&g).unwrap());
        }
    }
}
