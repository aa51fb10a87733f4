//! Depth-first branch and bound over the bits that constraints actually read.
//! Exact, but with a node budget instead of an assignment-count cap, so it
//! reaches systems with more bits than the exhaustive oracle when most
//! constraints are local.

use super::formula::Weight;
use super::oracle::{Compiled, Unsat};
use crate::{Error, Result};

pub const DEFAULT_SEARCH_BUDGET: u64 = 1 << 28;

struct Plan {
    order: Vec<u32>,
    /// Checks that become fully assigned at each depth.
    ready: Vec<Vec<usize>>,
    /// Checks reading no bits at all.
    constant: Vec<usize>,
}

fn plan(c: &Compiled) -> Plan {
    let mut position = vec![u32::MAX; c.bits as usize];
    let mut order = Vec::new();
    let mut ready: Vec<Vec<usize>> = Vec::new();
    let mut constant = Vec::new();
    for (i, (check, _)) in c.checks.iter().enumerate() {
        let bits = check.bits();
        for &b in &bits {
            if position[b as usize] == u32::MAX {
                position[b as usize] = order.len() as u32;
                order.push(b);
                ready.push(Vec::new());
            }
        }
        match bits.iter().map(|&b| position[b as usize]).max() {
            Some(depth) => ready[depth as usize].push(i),
            None => constant.push(i),
        }
    }
    Plan { order, ready, constant }
}

struct Search<'a> {
    c: &'a Compiled,
    plan: Plan,
    words: Vec<u64>,
    budget: u64,
    nodes: u64,
    best: u128,
    best_words: Vec<u64>,
    stop_at_zero: bool,
}

impl Search<'_> {
    fn get(&self, i: u32) -> bool {
        (self.words[i as usize / 64] >> (i % 64)) & 1 == 1
    }

    fn set(&mut self, i: u32, v: bool) {
        if v {
            self.words[i as usize / 64] |= 1 << (i % 64);
        } else {
            self.words[i as usize / 64] &= !(1 << (i % 64));
        }
    }

    fn cost_at(&self, depth: usize) -> u128 {
        let get = |i: u32| self.get(i);
        self.plan.ready[depth]
            .iter()
            .filter(|&&k| !self.c.checks[k].0.eval(&get))
            .map(|&k| self.c.checks[k].1 as u128)
            .sum()
    }

    fn run(&mut self, depth: usize, cost: u128) -> Result<()> {
        if depth == self.plan.order.len() {
            if cost < self.best {
                self.best = cost;
                self.best_words = self.words.clone();
            }
            return Ok(());
        }
        let bit = self.plan.order[depth];
        for value in [false, true] {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::SearchBudget(self.budget));
            }
            self.set(bit, value);
            let next = cost + self.cost_at(depth);
            if next < self.best {
                self.run(depth + 1, next)?;
            }
            if self.stop_at_zero && self.best == 0 {
                return Ok(());
            }
        }
        self.set(bit, false);
        Ok(())
    }
}

fn search(c: &Compiled, budget: u64, feasibility: bool) -> Result<(u128, Vec<u64>)> {
    let plan = plan(c);
    let words = vec![0u64; (c.bits as usize).div_ceil(64).max(1)];
    let get = |i: u32| (words[i as usize / 64] >> (i % 64)) & 1 == 1;
    let base: u128 = plan.constant.iter().filter(|&&k| !c.checks[k].0.eval(&get)).map(|&k| c.checks[k].1 as u128).sum();
    let mut s = Search {
        c,
        plan,
        best_words: words.clone(),
        words,
        budget,
        nodes: 0,
        // In feasibility mode any violated check prunes.
        best: if feasibility { 1 } else { u128::MAX },
        stop_at_zero: true,
    };
    if feasibility && base > 0 {
        return Ok((u128::MAX, Vec::new()));
    }
    s.run(0, base)?;
    if feasibility && s.best != 0 {
        return Ok((u128::MAX, Vec::new()));
    }
    Ok((s.best, s.best_words))
}

/// Exact `UNSAT(p)` by branch and bound; errors if more than `budget` nodes are visited.
pub fn exact_min_unsat(p: &impl Unsat, budget: u64) -> Result<Weight> {
    let c = p.compile()?;
    let (best, _) = search(&c, budget, false)?;
    c.fraction(best)
}

/// A satisfying assignment as a flat bit vector, or `None` if none exists.
pub fn find_satisfying(p: &impl Unsat, budget: u64) -> Result<Option<Vec<bool>>> {
    let c = p.compile()?;
    let (best, words) = search(&c, budget, true)?;
    if best != 0 {
        return Ok(None);
    }
    Ok(Some((0..c.bits).map(|i| (words[i as usize / 64] >> (i % 64)) & 1 == 1).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{brute_force_unsat, Clause, CnfFormula, Kind, Literal};
    use proptest::prelude::*;

    #[test]
    fn finds_assignment() {
        let f = CnfFormula::from_dimacs(3, &[&[1, 2], &[-1], &[-2, 3]]).unwrap();
        let a = find_satisfying(&f, DEFAULT_SEARCH_BUDGET).unwrap().unwrap();
        assert!(f.is_satisfied_by(&a));
        let g = CnfFormula::from_dimacs(1, &[&[1], &[-1]]).unwrap();
        assert_eq!(find_satisfying(&g, DEFAULT_SEARCH_BUDGET).unwrap(), None);
    }

    #[test]
    fn budget_is_enforced() {
        let clauses: Vec<Vec<i64>> = (1..=20).map(|i| vec![i, -(i % 20 + 1)]).collect();
        let refs: Vec<&[i64]> = clauses.iter().map(|c| c.as_slice()).collect();
        let f = CnfFormula::from_dimacs(20, &refs).unwrap();
        assert_eq!(exact_min_unsat(&f, 3), Err(Error::SearchBudget(3)));
    }

    fn random_formula() -> impl Strategy<Value = CnfFormula> {
        let lit = (1u32..=6, any::<bool>()).prop_map(|(v, s)| Literal::new(v, s));
        prop::collection::vec(prop::collection::vec(lit, 1..4), 1..25)
            .prop_map(|cs| CnfFormula::new(6, Kind::Sat, cs.into_iter().map(Clause::new).collect()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn agrees_with_enumeration(f in random_formula()) {
            let exact = brute_force_unsat(&f).unwrap();
            prop_assert_eq!(exact_min_unsat(&f, DEFAULT_SEARCH_BUDGET).unwrap(), exact);
            let sat = find_satisfying(&f, DEFAULT_SEARCH_BUDGET).unwrap();
            prop_assert_eq!(sat.is_some(), exact == Weight::from_integer(0));
            if let Some(a) = sat {
                prop_assert!(f.is_satisfied_by(&a));
            }
        }
    }
}
