//! Support for the acceptance run: a checklist that prints one line per
//! criterion, and reference evaluators written against the clause semantics
//! directly, so checks do not lean on the oracles they are checking.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::Rng;

use ufg_core::csp::{Clause, CnfFormula, Kind, Literal, Weight};

pub type Outcome = Result<String, String>;

/// Fails with `msg` unless `cond` holds.
pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[derive(Debug, Default)]
pub struct Checklist {
    results: Vec<(u32, bool)>,
}

impl Checklist {
    pub fn new() -> Self {
        Checklist::default()
    }

    /// Runs one criterion. A panic or an overrun of `limit` counts as a failure.
    pub fn run(&mut self, id: u32, title: &str, limit: Duration, check: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(panic) => Err(panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .map_or_else(|| "panicked".into(), |s| format!("panicked: {s}"))),
        };
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > limit => Err(format!("took {:.2} s, limit {:.0} s", elapsed.as_secs_f64(), limit.as_secs_f64())),
            other => other,
        };
        let passed = outcome.is_ok();
        let detail = outcome.unwrap_or_else(|e| e);
        println!(
            "{} {:>2} {title}: {detail} ({:.2} s)",
            if passed { "PASS" } else { "FAIL" },
            id,
            elapsed.as_secs_f64()
        );
        self.results.push((id, passed));
    }

    pub fn failed(&self) -> Vec<u32> {
        self.results.iter().filter(|r| !r.1).map(|r| r.0).collect()
    }

    /// Prints the summary line; true when every criterion passed.
    pub fn finish(&self) -> bool {
        let failed = self.failed();
        println!("acceptance: {} passed, {} failed {:?}", self.results.len() - failed.len(), failed.len(), failed);
        failed.is_empty()
    }
}

pub fn literal_value(l: &Literal, x: &[bool]) -> bool {
    x[l.var as usize - 1] != l.negated
}

pub fn clause_holds(kind: Kind, lits: &[Literal], x: &[bool]) -> bool {
    let values = lits.iter().map(|l| literal_value(l, x));
    match kind {
        Kind::Sat => values.into_iter().any(|v| v),
        Kind::Nae => {
            let v: Vec<bool> = values.collect();
            v.iter().any(|&b| b) && v.iter().any(|&b| !b)
        }
        Kind::Lin => values.fold(false, |acc, v| acc ^ v),
    }
}

pub fn satisfies(f: &CnfFormula, x: &[bool]) -> bool {
    f.clauses().iter().all(|c| clause_holds(f.kind(), &c.lits, x))
}

pub fn violated_weight(f: &CnfFormula, x: &[bool]) -> Weight {
    f.clauses().iter().filter(|c| !clause_holds(f.kind(), &c.lits, x)).map(|c| c.weight).sum()
}

/// Bits of `mask` as an assignment of `n` variables (bit i is variable i + 1).
pub fn assignment(mask: u64, n: u32) -> Vec<bool> {
    (0..n).map(|i| (mask >> i) & 1 == 1).collect()
}

/// First satisfying assignment in mask order, by enumeration.
pub fn find_model(f: &CnfFormula) -> Option<Vec<bool>> {
    assert!(f.n() <= 24, "enumeration limited to 24 variables");
    (0..1u64 << f.n()).map(|mask| assignment(mask, f.n())).find(|x| satisfies(f, x))
}

/// Least violated weight over all assignments, by enumeration.
pub fn min_violated_weight(f: &CnfFormula) -> Weight {
    assert!(f.n() <= 24, "enumeration limited to 24 variables");
    (0..1u64 << f.n()).map(|mask| violated_weight(f, &assignment(mask, f.n()))).min().unwrap_or_default()
}

/// Random exact 3CNF: three distinct variables per clause, random signs.
pub fn random_3cnf(rng: &mut impl Rng, n: u32, m: usize) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            let vars = sample(rng, n as usize, 3);
            Clause::new(vars.iter().map(|v| Literal::new(v as u32 + 1, rng.gen())).collect())
        })
        .collect();
    CnfFormula::new(n, Kind::Sat, clauses).expect("valid random formula")
}

/// Random CNF with clause lengths in `1..=max_len` (variables may repeat).
pub fn random_cnf(rng: &mut impl Rng, n: u32, m: usize, max_len: usize) -> CnfFormula {
    let clauses = (0..m)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            Clause::new((0..len).map(|_| Literal::new(rng.gen_range(1..=n), rng.gen())).collect())
        })
        .collect();
    CnfFormula::new(n, Kind::Sat, clauses).expect("valid random formula")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_semantics() {
        let x = [true, false];
        let (a, b) = (Literal::pos(1), Literal::pos(2));
        assert!(clause_holds(Kind::Sat, &[a, b], &x));
        assert!(clause_holds(Kind::Nae, &[a, b], &x));
        assert!(clause_holds(Kind::Lin, &[a, b], &x));
        assert!(!clause_holds(Kind::Nae, &[a, Literal::neg(2)], &x));
        assert!(!clause_holds(Kind::Lin, &[a, Literal::neg(2)], &x));
    }

    #[test]
    fn enumeration_finds_the_only_model() {
        let f = CnfFormula::from_dimacs(2, &[&[1], &[-2]]).unwrap();
        assert_eq!(find_model(&f), Some(vec![true, false]));
        assert_eq!(min_violated_weight(&f), Weight::from_integer(0));
        let g = CnfFormula::from_dimacs(1, &[&[1], &[-1]]).unwrap();
        assert_eq!(find_model(&g), None);
        assert_eq!(min_violated_weight(&g), Weight::from_integer(1));
    }
}
