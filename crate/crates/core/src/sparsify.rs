//! Splits a 3CNF formula into a list of formulas whose disjunction is
//! equisatisfiable with it and in which no small set of literals (a "heart")
//! occurs in too many clauses.
//!
//! Whenever at least `θ_h` clauses strictly contain a heart `H` of size `h`
//! (checked for `h = 2` first, then `h = 1`), the formula branches:
//! either the clause `H` holds (add it; it subsumes all those clauses) or it
//! fails (drop `H` from each of them). Every branch implies the input, and
//! every model of the input satisfies one of the two branches.

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};

use num_rational::Rational64;
use serde::Serialize;

use crate::csp::{Clause, CnfFormula, Kind, Literal};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsifyParams {
    pub epsilon: Rational64,
    /// Overrides the derived `(θ1, θ2)` thresholds for heart sizes 1 and 2.
    pub thresholds: Option<(u64, u64)>,
}

impl SparsifyParams {
    pub fn new(epsilon: Rational64) -> Self {
        SparsifyParams { epsilon, thresholds: None }
    }

    pub fn with_thresholds(epsilon: Rational64, theta1: u64, theta2: u64) -> Self {
        SparsifyParams { epsilon, thresholds: Some((theta1, theta2)) }
    }
}

/// Threshold schedule for `n` variables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Schedule {
    pub alpha: u64,
    /// Threshold for hearts of one literal, `(4α)²`.
    pub theta1: u64,
    /// Threshold for hearts of two literals, `4α`.
    pub theta2: u64,
}

/// Smallest integer `α` with `α / log2(4α) > 48 · n^ε`, the clause-count
/// condition for 3CNF with the per-variable branching budget `n^-ε`.
pub fn schedule(n: u32, epsilon: Rational64) -> Result<Schedule> {
    check_epsilon(epsilon)?;
    let eps = *epsilon.numer() as f64 / *epsilon.denom() as f64;
    let target = 48.0 * (n.max(1) as f64).powf(eps);
    let holds = |a: u64| (a as f64) / ((4 * a) as f64).log2() > target;
    let mut hi = 1u64;
    while !holds(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2;
    // α/log2(4α) is increasing for α ≥ 1, so bisection finds the smallest.
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let alpha = hi;
    Ok(Schedule { alpha, theta1: (4 * alpha).pow(2), theta2: 4 * alpha })
}

fn check_epsilon(epsilon: Rational64) -> Result<()> {
    if epsilon <= Rational64::from_integer(0) || epsilon >= Rational64::from_integer(1) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must lie in (0, 1)")));
    }
    Ok(())
}

/// Output of [`sparsify`] together with the bounds it was checked against.
#[derive(Clone, Debug, PartialEq)]
pub struct Sparsified {
    pub branches: Vec<CnfFormula>,
    pub schedule: Schedule,
    /// `2^(n^(1-ε))`.
    pub branch_bound: f64,
}

impl Sparsified {
    pub fn max_clauses(&self) -> usize {
        self.branches.iter().map(CnfFormula::m).max().unwrap_or(0)
    }
}

type Lits = Vec<Literal>;

fn contains(clause: &Lits, heart: &[Literal]) -> bool {
    clause.len() > heart.len() && heart.iter().all(|l| clause.contains(l))
}

/// Heart with the most petals among those reaching the threshold; hearts of
/// two literals take precedence, ties go to the lexicographically smallest.
fn find_heart(clauses: &[Lits], s: &Schedule) -> Option<Vec<Literal>> {
    let mut pairs: BTreeMap<(Literal, Literal), u64> = BTreeMap::new();
    let mut singles: BTreeMap<Literal, u64> = BTreeMap::new();
    for c in clauses {
        let mut set: Vec<Literal> = c.clone();
        set.sort();
        set.dedup();
        for (i, &a) in set.iter().enumerate() {
            if set.len() > 1 {
                *singles.entry(a).or_default() += 1;
            }
            if set.len() > 2 {
                for &b in &set[i + 1..] {
                    if a.var != b.var {
                        *pairs.entry((a, b)).or_default() += 1;
                    }
                }
            }
        }
    }
    let best_pair = pairs.iter().filter(|(_, &c)| c >= s.theta2).max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)));
    if let Some((&(a, b), _)) = best_pair {
        return Some(vec![a, b]);
    }
    singles
        .iter()
        .filter(|(_, &c)| c >= s.theta1)
        .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)))
        .map(|(&l, _)| vec![l])
}

/// Drops repeated clauses (as literal sets) and clauses strictly subsumed by
/// another one; both keep the formula equivalent.
fn dedup_clauses(clauses: Vec<Lits>) -> Vec<Lits> {
    let mut seen = HashSet::new();
    let sets: Vec<Lits> = clauses
        .iter()
        .map(|c| {
            let mut key = c.clone();
            key.sort();
            key.dedup();
            key
        })
        .collect();
    let subsumed = |i: usize| {
        sets.iter().any(|d| d.len() < sets[i].len() && d.iter().all(|l| sets[i].contains(l)))
    };
    clauses
        .into_iter()
        .enumerate()
        .filter(|(i, _)| seen.insert(sets[*i].clone()) && !subsumed(*i))
        .map(|(_, c)| c)
        .collect()
}

struct Ctx {
    n: u32,
    schedule: Schedule,
    limit: u64,
    leaves: AtomicU64,
}

fn expand(ctx: &Ctx, clauses: Vec<Lits>) -> Result<Vec<Vec<Lits>>> {
    let Some(heart) = find_heart(&clauses, &ctx.schedule) else {
        let leaves = ctx.leaves.fetch_add(1, Ordering::Relaxed) + 1;
        if leaves > ctx.limit {
            return Err(Error::BranchLimit(ctx.limit));
        }
        return Ok(vec![clauses]);
    };
    let first = clauses.iter().position(|c| contains(c, &heart)).expect("heart has petals");
    let mut with_heart = Vec::with_capacity(clauses.len());
    let mut without_heart = Vec::with_capacity(clauses.len());
    for (i, c) in clauses.iter().enumerate() {
        if contains(c, &heart) {
            if i == first {
                with_heart.push(heart.clone());
            }
            without_heart.push(c.iter().copied().filter(|l| !heart.contains(l)).collect());
        } else {
            with_heart.push(c.clone());
            without_heart.push(c.clone());
        }
    }
    let (a, b) = rayon::join(|| expand(ctx, dedup_clauses(with_heart)), || expand(ctx, dedup_clauses(without_heart)));
    let mut out = a?;
    out.extend(b?);
    Ok(out)
}

/// Branches of `phi` in depth-first order (heart-holds branch first).
pub fn sparsify(phi: &CnfFormula, p: &SparsifyParams) -> Result<Sparsified> {
    check_epsilon(p.epsilon)?;
    if phi.kind() != Kind::Sat {
        return Err(Error::KindMismatch { expected: "sat", got: phi.kind().as_str() });
    }
    if let Some(i) = phi.clauses().iter().position(|c| c.len() > 3) {
        return Err(Error::BadArity(i));
    }
    let n = phi.n();
    let mut schedule = schedule(n, p.epsilon)?;
    if let Some((t1, t2)) = p.thresholds {
        if t1 == 0 || t2 == 0 || t2 > t1 {
            return Err(Error::InvalidParameter("thresholds must be positive with θ1 ≥ θ2".into()));
        }
        schedule.theta1 = t1;
        schedule.theta2 = t2;
    }
    let eps = *p.epsilon.numer() as f64 / *p.epsilon.denom() as f64;
    let branch_bound = 2f64.powf((n as f64).powf(1.0 - eps));
    let ctx = Ctx { n, schedule, limit: if n >= 63 { u64::MAX } else { 1u64 << n }, leaves: AtomicU64::new(0) };
    let weight = phi.clauses().first().map(|c| c.weight);
    let uniform = weight.is_some() && phi.clauses().iter().all(|c| Some(c.weight) == weight);
    if !uniform && phi.m() > 0 {
        return Err(Error::InvalidParameter("sparsify expects uniformly weighted clauses".into()));
    }
    let start: Vec<Lits> = phi.clauses().iter().map(|c| c.lits.clone()).collect();
    let branches = expand(&ctx, start)?
        .into_iter()
        .map(|cs| {
            let clauses = cs.into_iter().map(|lits| Clause::weighted(lits, weight.unwrap_or_else(|| Rational64::from_integer(1)))).collect();
            CnfFormula::new(ctx.n, Kind::Sat, clauses)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sparsified { branches, schedule, branch_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::brute_force_unsat;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};

    fn eps(p: i64, q: i64) -> Rational64 {
        Rational64::new(p, q)
    }

    #[test]
    fn schedule_is_minimal() {
        let s = schedule(10, eps(3, 10)).unwrap();
        let target = 48.0 * 10f64.powf(0.3);
        let f = |a: u64| a as f64 / ((4 * a) as f64).log2();
        assert!(f(s.alpha) > target && f(s.alpha - 1) <= target);
        assert_eq!(s.theta2, 4 * s.alpha);
        assert_eq!(s.theta1, s.theta2 * s.theta2);
        assert!(schedule(10, eps(0, 1)).is_err());
        assert!(schedule(10, eps(1, 1)).is_err());
    }

    #[test]
    fn sparse_formula_is_unchanged() {
        let f = CnfFormula::from_dimacs(4, &[&[1, 2, 3], &[-1, 2, 4], &[3, -4, 2]]).unwrap();
        let out = sparsify(&f, &SparsifyParams::new(eps(1, 20))).unwrap();
        assert_eq!(out.branches, vec![f]);
    }

    #[test]
    fn single_literal_heart_by_hand() {
        // x1 sits in three clauses and no pair of literals reaches θ2 = 3.
        let f = CnfFormula::from_dimacs(5, &[&[1, 2, 3], &[1, -2, 4], &[1, -3, -4], &[2, 5, -4], &[-5, 3, 4]]).unwrap();
        let out = sparsify(&f, &SparsifyParams::with_thresholds(eps(1, 2), 3, 3)).unwrap();
        let holds = CnfFormula::from_dimacs(5, &[&[1], &[2, 5, -4], &[-5, 3, 4]]).unwrap();
        let fails = CnfFormula::from_dimacs(5, &[&[2, 3], &[-2, 4], &[-3, -4], &[2, 5, -4], &[-5, 3, 4]]).unwrap();
        assert_eq!(out.branches, vec![holds, fails]);
    }

    #[test]
    fn pair_hearts_come_first() {
        let f = CnfFormula::from_dimacs(5, &[&[1, 2, 3], &[1, 2, 4], &[1, 2, 5], &[1, 3, 4]]).unwrap();
        let out = sparsify(&f, &SparsifyParams::with_thresholds(eps(1, 2), 3, 3)).unwrap();
        assert_eq!(out.branches[0].clauses()[0].lits, vec![Literal::pos(1), Literal::pos(2)]);
    }

    #[test]
    fn disjunction_is_equisatisfiable() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut total = 0;
        for _ in 0..40 {
            let clauses: Vec<Vec<i64>> = (0..30)
                .map(|_| (0..3).map(|_| rng.gen_range(1..=8i64) * if rng.gen() { 1 } else { -1 }).collect())
                .collect();
            let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
            let f = CnfFormula::from_dimacs(8, &refs).unwrap();
            let out = sparsify(&f, &SparsifyParams::with_thresholds(eps(1, 2), 8, 4)).unwrap();
            assert!(out.branches.len() as u64 <= 1 << 8);
            total += out.branches.len();
            let any = out.branches.iter().any(|b| brute_force_unsat(b).unwrap().is_zero());
            assert_eq!(any, brute_force_unsat(&f).unwrap().is_zero());
            for b in &out.branches {
                assert!(b.max_arity() <= 3);
                // Every model of a branch is a model of the input.
                for x in 0u32..256 {
                    let a: Vec<bool> = (0..8).map(|i| (x >> i) & 1 == 1).collect();
                    if b.is_satisfied_by(&a) {
                        assert!(f.is_satisfied_by(&a));
                    }
                }
            }
        }
        assert!(total > 80, "branching was never triggered ({total} branches)");
    }
}
