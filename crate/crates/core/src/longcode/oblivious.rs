use crate::csp::{Clause, Literal};

/// `y = x` (or `y ≠ x` when `negated`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Equality {
    pub y: u32,
    pub x: u32,
    pub negated: bool,
}

impl Equality {
    pub fn holds(&self, assignment: &[bool]) -> bool {
        (assignment[self.y as usize - 1] == assignment[self.x as usize - 1]) != self.negated
    }
}

/// A clause rewritten as an all-positive shadow clause over fresh variables
/// plus one equality per literal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObliviousSplit {
    pub original: Clause,
    pub shadow: Clause,
    pub equalities: Vec<Equality>,
}

impl ObliviousSplit {
    pub fn holds(&self, assignment: &[bool]) -> bool {
        self.shadow.lits.iter().any(|l| l.eval(assignment)) && self.equalities.iter().all(|e| e.holds(assignment))
    }
}

/// Shadow variables are `first_fresh, first_fresh + 1, …` in literal order.
pub fn oblivious_split(clause: &Clause, first_fresh: u32) -> ObliviousSplit {
    let ys = (0..clause.lits.len() as u32).map(|i| first_fresh + i);
    let equalities = clause.lits.iter().zip(ys.clone()).map(|(l, y)| Equality { y, x: l.var, negated: l.negated }).collect();
    ObliviousSplit {
        original: clause.clone(),
        shadow: Clause::weighted(ys.map(Literal::pos).collect(), clause.weight),
        equalities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::Kind;

    #[test]
    fn positive_clause() {
        let s = oblivious_split(&Clause::from_dimacs(&[1, 2, 3]).unwrap(), 4);
        assert_eq!(s.shadow.lits, vec![Literal::pos(4), Literal::pos(5), Literal::pos(6)]);
        assert!(s.equalities.iter().all(|e| !e.negated));
        assert_eq!(s.equalities.iter().map(|e| (e.y, e.x)).collect::<Vec<_>>(), vec![(4, 1), (5, 2), (6, 3)]);
    }

    #[test]
    fn flip_touches_one_equality() {
        let a = oblivious_split(&Clause::from_dimacs(&[1, 2, 3]).unwrap(), 4);
        let b = oblivious_split(&Clause::from_dimacs(&[1, -2, 3]).unwrap(), 4);
        assert_eq!(a.shadow, b.shadow);
        let differ: Vec<usize> = (0..3).filter(|&i| a.equalities[i] != b.equalities[i]).collect();
        assert_eq!(differ, vec![1]);
        assert!(b.equalities[1].negated);
    }

    #[test]
    fn conjunction_matches_clause() {
        for signs in 0..8 {
            let lits: Vec<i64> = (0..3).map(|i| if (signs >> i) & 1 == 1 { -(i + 1) } else { i + 1 }).collect();
            let c = Clause::from_dimacs(&lits).unwrap();
            let s = oblivious_split(&c, 4);
            for x in 0..8u32 {
                let orig: Vec<bool> = (0..3).map(|i| (x >> i) & 1 == 1).collect();
                let clause_value = c.eval(Kind::Sat, &orig);
                let mut any_extension = false;
                for y in 0..8u32 {
                    let mut full = orig.clone();
                    full.extend((0..3).map(|i| (y >> i) & 1 == 1));
                    any_extension |= s.holds(&full);
                }
                assert_eq!(any_extension, clause_value);
            }
        }
    }
}
