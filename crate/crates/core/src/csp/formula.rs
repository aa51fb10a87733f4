use std::fmt;
use std::ops::Not;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exact clause weight.
pub type Weight = Rational64;

/// A variable (1-based) with a polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: u32,
    pub negated: bool,
}

impl Literal {
    pub fn new(var: u32, negated: bool) -> Self {
        Literal { var, negated }
    }

    pub fn pos(var: u32) -> Self {
        Literal::new(var, false)
    }

    pub fn neg(var: u32) -> Self {
        Literal::new(var, true)
    }

    /// Parses a signed DIMACS integer.
    pub fn from_dimacs(value: i64) -> Result<Self> {
        if value == 0 {
            return Err(Error::ZeroVariable);
        }
        let var = u32::try_from(value.unsigned_abs()).map_err(|_| Error::Overflow("parsing a literal"))?;
        Ok(Literal::new(var, value < 0))
    }

    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    /// Value of the literal under `assignment`, indexed by `var - 1`.
    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[(self.var - 1) as usize] != self.negated
    }

    pub fn with_polarity(self, negated: bool) -> Self {
        Literal::new(self.var, negated)
    }
}

impl Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal::new(self.var, !self.negated)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Evaluation semantics shared by every clause of a formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    /// At least one literal is true.
    Sat,
    /// At least one literal is true and at least one is false.
    Nae,
    /// The XOR of the literals is 1.
    Lin,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Sat => "sat",
            Kind::Nae => "nae",
            Kind::Lin => "lin",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        match s {
            "sat" => Some(Kind::Sat),
            "nae" => Some(Kind::Nae),
            "lin" => Some(Kind::Lin),
            _ => None,
        }
    }

    pub fn eval(self, mut values: impl Iterator<Item = bool>) -> bool {
        match self {
            Kind::Sat => values.any(|v| v),
            Kind::Nae => {
                let (mut any_true, mut any_false) = (false, false);
                for v in values {
                    any_true |= v;
                    any_false |= !v;
                }
                any_true && any_false
            }
            Kind::Lin => values.fold(false, |acc, v| acc ^ v),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ordered tuple of literals with a weight. Duplicate variables are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    pub lits: Vec<Literal>,
    pub weight: Weight,
}

impl Clause {
    pub fn new(lits: Vec<Literal>) -> Self {
        Clause { lits, weight: Weight::one() }
    }

    pub fn weighted(lits: Vec<Literal>, weight: Weight) -> Self {
        Clause { lits, weight }
    }

    pub fn from_dimacs(lits: &[i64]) -> Result<Self> {
        let lits = lits.iter().map(|&l| Literal::from_dimacs(l)).collect::<Result<Vec<_>>>()?;
        Ok(Clause::new(lits))
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn eval(&self, kind: Kind, assignment: &[bool]) -> bool {
        kind.eval(self.lits.iter().map(|l| l.eval(assignment)))
    }
}

/// A CNF-shaped constraint system: `n` variables, ordered clauses, one kind.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CnfFormula {
    n: u32,
    kind: Kind,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(n: u32, kind: Kind, clauses: Vec<Clause>) -> Result<Self> {
        for (i, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(Error::EmptyClause(i));
            }
            if clause.weight < Weight::zero() {
                return Err(Error::NegativeWeight(i));
            }
            for lit in &clause.lits {
                if lit.var == 0 {
                    return Err(Error::ZeroVariable);
                }
                if lit.var > n {
                    return Err(Error::VariableOutOfRange { var: lit.var, n });
                }
            }
        }
        let formula = CnfFormula { n, kind, clauses };
        if !formula.clauses.is_empty() && formula.total_weight().is_zero() {
            return Err(Error::ZeroTotalWeight);
        }
        Ok(formula)
    }

    /// Unweighted SAT formula from signed DIMACS literals.
    pub fn from_dimacs(n: u32, clauses: &[&[i64]]) -> Result<Self> {
        let clauses = clauses.iter().map(|c| Clause::from_dimacs(c)).collect::<Result<Vec<_>>>()?;
        CnfFormula::new(n, Kind::Sat, clauses)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn into_clauses(self) -> Vec<Clause> {
        self.clauses
    }

    /// `|φ| = n + m`.
    pub fn size(&self) -> u64 {
        self.n as u64 + self.clauses.len() as u64
    }

    pub fn slot_count(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    pub fn max_arity(&self) -> usize {
        self.clauses.iter().map(Clause::len).max().unwrap_or(0)
    }

    pub fn total_weight(&self) -> Weight {
        self.clauses.iter().map(|c| c.weight).sum()
    }

    pub fn is_unweighted(&self) -> bool {
        self.clauses.iter().all(|c| c.weight.is_one())
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.eval(self.kind, assignment))
    }

    /// Total weight of the clauses `assignment` violates.
    pub fn unsat_weight(&self, assignment: &[bool]) -> Weight {
        self.clauses
            .iter()
            .filter(|c| !c.eval(self.kind, assignment))
            .map(|c| c.weight)
            .sum()
    }

    pub fn polarities(&self) -> PolarityTemplate {
        PolarityTemplate {
            bits: self.clauses.iter().flat_map(|c| c.lits.iter().map(|l| l.negated)).collect(),
        }
    }

    pub fn factor_graph(&self) -> FactorGraph {
        FactorGraph {
            n: self.n,
            kind: self.kind,
            slots: self.clauses.iter().map(|c| c.lits.iter().map(|l| l.var).collect()).collect(),
            weights: self.clauses.iter().map(|c| c.weight).collect(),
        }
    }

    /// Same clauses with every weight replaced by `w`.
    pub fn with_uniform_weight(&self, w: Weight) -> CnfFormula {
        let clauses = self.clauses.iter().map(|c| Clause::weighted(c.lits.clone(), w)).collect();
        CnfFormula { n: self.n, kind: self.kind, clauses }
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                let lits: Vec<String> = c.lits.iter().map(|l| l.to_string()).collect();
                format!("({})", lits.join(" "))
            })
            .collect();
        write!(f, "{}[{}]", self.kind, parts.join(" "))
    }
}

/// Polarity-free structure of a formula: which variables occupy which slots.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorGraph {
    pub n: u32,
    pub kind: Kind,
    pub slots: Vec<Vec<u32>>,
    pub weights: Vec<Weight>,
}

impl FactorGraph {
    pub fn m(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_count(&self) -> usize {
        self.slots.iter().map(Vec::len).sum()
    }

    pub fn apply(&self, template: &PolarityTemplate) -> Result<CnfFormula> {
        if template.bits.len() != self.slot_count() {
            return Err(Error::TemplateLength { expected: self.slot_count(), got: template.bits.len() });
        }
        let mut bits = template.bits.iter().copied();
        let clauses = self
            .slots
            .iter()
            .zip(&self.weights)
            .map(|(slots, &w)| {
                let lits = slots.iter().map(|&v| Literal::new(v, bits.next().unwrap_or(false))).collect();
                Clause::weighted(lits, w)
            })
            .collect();
        CnfFormula::new(self.n, self.kind, clauses)
    }
}

/// One polarity bit per slot; `true` means the slot's literal is negated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PolarityTemplate {
    pub bits: Vec<bool>,
}

impl PolarityTemplate {
    pub fn new(bits: Vec<bool>) -> Self {
        PolarityTemplate { bits }
    }

    pub fn all_positive(len: usize) -> Self {
        PolarityTemplate { bits: vec![false; len] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

pub fn factor_graph_of(f: &CnfFormula) -> FactorGraph {
    f.factor_graph()
}

pub fn apply_polarities(fg: &FactorGraph, t: &PolarityTemplate) -> Result<CnfFormula> {
    fg.apply(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strips_polarities() {
        let f = CnfFormula::from_dimacs(3, &[&[1, -2, 3]]).unwrap();
        let fg = factor_graph_of(&f);
        assert_eq!(fg.slots, vec![vec![1, 2, 3]]);
        assert_eq!(fg.weights, vec![Weight::one()]);
    }

    #[test]
    fn polarity_variants_share_factor_graph() {
        let f = CnfFormula::from_dimacs(3, &[&[1, -2, 3]]).unwrap();
        let g = CnfFormula::from_dimacs(3, &[&[-1, 2, -3]]).unwrap();
        assert_eq!(factor_graph_of(&f), factor_graph_of(&g));
    }

    #[test]
    fn duplicates_are_preserved() {
        let f = CnfFormula::from_dimacs(3, &[&[1, 1, 2], &[-2, 3, 3]]).unwrap();
        assert_eq!(factor_graph_of(&f).slots, vec![vec![1, 1, 2], vec![2, 3, 3]]);
    }

    #[test]
    fn apply_template() {
        let fg = CnfFormula::from_dimacs(3, &[&[1, 2, 3]]).unwrap().factor_graph();
        let f = apply_polarities(&fg, &PolarityTemplate::new(vec![false, true, false])).unwrap();
        assert_eq!(f, CnfFormula::from_dimacs(3, &[&[1, -2, 3]]).unwrap());
        let g = apply_polarities(&fg, &PolarityTemplate::all_positive(3)).unwrap();
        assert!(g.clauses()[0].lits.iter().all(|l| !l.negated));
        assert_eq!(
            apply_polarities(&fg, &PolarityTemplate::all_positive(2)),
            Err(Error::TemplateLength { expected: 3, got: 2 })
        );
    }

    #[test]
    fn rejects_malformed_formulas() {
        assert!(matches!(
            CnfFormula::from_dimacs(2, &[&[1, 3]]),
            Err(Error::VariableOutOfRange { var: 3, n: 2 })
        ));
        let neg = Clause::weighted(vec![Literal::pos(1)], Weight::new(-1, 2));
        assert_eq!(CnfFormula::new(1, Kind::Sat, vec![neg]), Err(Error::NegativeWeight(0)));
    }

    #[test]
    fn kind_semantics() {
        assert!(Kind::Sat.eval([false, true].into_iter()));
        assert!(!Kind::Nae.eval([true, true, true].into_iter()));
        assert!(Kind::Nae.eval([true, false].into_iter()));
        assert!(Kind::Lin.eval([true, false].into_iter()));
        assert!(!Kind::Lin.eval([true, true].into_iter()));
    }

    fn arb_formula() -> impl Strategy<Value = CnfFormula> {
        (1u32..6).prop_flat_map(|n| {
            let lit = (1..=n, any::<bool>()).prop_map(|(v, s)| Literal::new(v, s));
            let clause = (prop::collection::vec(lit, 1..4), 1i64..5, 1i64..4)
                .prop_map(|(lits, p, q)| Clause::weighted(lits, Weight::new(p, q)));
            prop::collection::vec(clause, 0..8).prop_map(move |cs| CnfFormula::new(n, Kind::Sat, cs).unwrap())
        })
    }

    proptest! {
        #[test]
        fn round_trip_through_factor_graph(f in arb_formula()) {
            let back = apply_polarities(&factor_graph_of(&f), &f.polarities()).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
