use std::fmt;

use serde::{Deserialize, Serialize};

/// One bit of one edge slot: `slot` indexes the edge's vertex tuple, `bit` the
/// position inside that vertex's alphabet word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub slot: u32,
    pub bit: u32,
}

impl Coord {
    pub fn new(slot: u32, bit: u32) -> Self {
        Coord { slot, bit }
    }
}

/// A nonconstant monomial of degree at most two. Quadratic monomials always
/// hold their coordinates in increasing order, and never a square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Monomial {
    Linear(Coord),
    Quadratic(Coord, Coord),
}

impl Monomial {
    /// `a·b`, reduced with `x² = x`.
    pub fn product(a: Coord, b: Coord) -> Monomial {
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => Monomial::Linear(a),
            std::cmp::Ordering::Less => Monomial::Quadratic(a, b),
            std::cmp::Ordering::Greater => Monomial::Quadratic(b, a),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Monomial::Linear(_) => 1,
            Monomial::Quadratic(..) => 2,
        }
    }

    pub fn eval(&self, value: impl Fn(Coord) -> bool) -> bool {
        match *self {
            Monomial::Linear(c) => value(c),
            Monomial::Quadratic(a, b) => value(a) && value(b),
        }
    }

    pub fn map(&self, f: impl Fn(Coord) -> Coord) -> Monomial {
        match *self {
            Monomial::Linear(c) => Monomial::Linear(f(c)),
            Monomial::Quadratic(a, b) => Monomial::product(f(a), f(b)),
        }
    }

    fn sort_key(&self) -> (Coord, Option<Coord>) {
        match *self {
            Monomial::Linear(c) => (c, None),
            Monomial::Quadratic(a, b) => (a, Some(b)),
        }
    }
}

/// A polynomial of degree at most two over GF(2), kept in canonical form:
/// monomials sorted by coordinate, each appearing at most once.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Gf2Poly {
    monomials: Vec<Monomial>,
    constant: bool,
}

impl Gf2Poly {
    /// Canonicalizes: repeated monomials cancel in pairs.
    pub fn new(mut monomials: Vec<Monomial>, constant: bool) -> Self {
        monomials.sort_by_key(Monomial::sort_key);
        let mut out: Vec<Monomial> = Vec::with_capacity(monomials.len());
        for m in monomials {
            if out.last() == Some(&m) {
                out.pop();
            } else {
                out.push(m);
            }
        }
        Gf2Poly { monomials: out, constant }
    }

    pub fn zero() -> Self {
        Gf2Poly::default()
    }

    pub fn constant(b: bool) -> Self {
        Gf2Poly { monomials: Vec::new(), constant: b }
    }

    pub fn linear(c: Coord) -> Self {
        Gf2Poly { monomials: vec![Monomial::Linear(c)], constant: false }
    }

    pub fn product(a: Coord, b: Coord) -> Self {
        Gf2Poly { monomials: vec![Monomial::product(a, b)], constant: false }
    }

    /// `x + y + b` for two coordinates; `x = y` when `b` is false.
    pub fn equality(a: Coord, b: Coord, negated: bool) -> Self {
        Gf2Poly::new(vec![Monomial::Linear(a), Monomial::Linear(b)], negated)
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn constant_term(&self) -> bool {
        self.constant
    }

    pub fn degree(&self) -> usize {
        self.monomials.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.monomials.is_empty()
    }

    /// The polynomial with its constant term dropped.
    pub fn homogeneous_part(&self) -> Gf2Poly {
        Gf2Poly { monomials: self.monomials.clone(), constant: false }
    }

    pub fn with_constant(&self, b: bool) -> Gf2Poly {
        Gf2Poly { monomials: self.monomials.clone(), constant: b }
    }

    pub fn add(&self, other: &Gf2Poly) -> Gf2Poly {
        let mut all = self.monomials.clone();
        all.extend_from_slice(&other.monomials);
        Gf2Poly::new(all, self.constant ^ other.constant)
    }

    pub fn add_constant(&self, b: bool) -> Gf2Poly {
        self.with_constant(self.constant ^ b)
    }

    /// Product of two polynomials whose product stays within degree two.
    /// Returns `None` if the degree would exceed two.
    pub fn mul(&self, other: &Gf2Poly) -> Option<Gf2Poly> {
        if self.degree() + other.degree() > 2 {
            return None;
        }
        let mut all = Vec::new();
        for a in &self.monomials {
            for b in &other.monomials {
                match (a, b) {
                    (Monomial::Linear(x), Monomial::Linear(y)) => all.push(Monomial::product(*x, *y)),
                    _ => unreachable!("degree checked above"),
                }
            }
            if other.constant {
                all.push(*a);
            }
        }
        if self.constant {
            all.extend_from_slice(&other.monomials);
        }
        Some(Gf2Poly::new(all, self.constant && other.constant))
    }

    pub fn eval(&self, value: impl Fn(Coord) -> bool) -> bool {
        self.monomials.iter().fold(self.constant, |acc, m| acc ^ m.eval(&value))
    }

    /// Renames coordinates; the result is re-canonicalized.
    pub fn map(&self, f: impl Fn(Coord) -> Coord) -> Gf2Poly {
        Gf2Poly::new(self.monomials.iter().map(|m| m.map(&f)).collect(), self.constant)
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        self.monomials.iter().flat_map(|m| match *m {
            Monomial::Linear(c) => [Some(c), None],
            Monomial::Quadratic(a, b) => [Some(a), Some(b)],
        })
        .flatten()
    }

    /// Splits into (quadratic monomials, linear monomials), both without constant.
    pub fn split_by_degree(&self) -> (Gf2Poly, Gf2Poly) {
        let (q, l): (Vec<Monomial>, Vec<Monomial>) =
            self.monomials.iter().partition(|m| m.degree() == 2);
        (Gf2Poly { monomials: q, constant: false }, Gf2Poly { monomials: l, constant: false })
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = self
            .monomials
            .iter()
            .map(|m| match m {
                Monomial::Linear(c) => format!("x{}.{}", c.slot, c.bit),
                Monomial::Quadratic(a, b) => format!("x{}.{}*x{}.{}", a.slot, a.bit, b.slot, b.bit),
            })
            .collect();
        if self.constant || terms.is_empty() {
            terms.push(if self.constant { "1".into() } else { "0".into() });
        }
        f.write_str(&terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(slot: u32, bit: u32) -> Coord {
        Coord::new(slot, bit)
    }

    #[test]
    fn canonical_form_cancels_pairs() {
        let p = Gf2Poly::new(
            vec![Monomial::Linear(c(1, 0)), Monomial::product(c(0, 1), c(0, 0)), Monomial::Linear(c(1, 0))],
            true,
        );
        assert_eq!(p.monomials(), &[Monomial::Quadratic(c(0, 0), c(0, 1))]);
        assert_eq!(Monomial::product(c(2, 2), c(2, 2)), Monomial::Linear(c(2, 2)));
    }

    #[test]
    fn multiplication_respects_degree() {
        let x = Gf2Poly::linear(c(0, 0)).add_constant(true);
        let y = Gf2Poly::linear(c(1, 0));
        let xy = x.mul(&y).unwrap();
        assert_eq!(xy, Gf2Poly::new(vec![Monomial::product(c(0, 0), c(1, 0)), Monomial::Linear(c(1, 0))], false));
        assert!(xy.mul(&y).is_none());
    }

    fn arb_poly() -> impl Strategy<Value = Gf2Poly> {
        let coord = (0u32..2, 0u32..3).prop_map(|(s, b)| Coord::new(s, b));
        let mono = prop_oneof![
            coord.clone().prop_map(Monomial::Linear),
            (coord.clone(), coord).prop_map(|(a, b)| Monomial::product(a, b)),
        ];
        (prop::collection::vec(mono, 0..6), any::<bool>()).prop_map(|(m, b)| Gf2Poly::new(m, b))
    }

    proptest! {
        #[test]
        fn addition_is_pointwise(p in arb_poly(), q in arb_poly(), x in 0u32..64) {
            let v = |c: Coord| (x >> (c.slot * 3 + c.bit)) & 1 == 1;
            prop_assert_eq!(p.add(&q).eval(v), p.eval(v) ^ q.eval(v));
        }

        #[test]
        fn canonical_form_is_order_independent(p in arb_poly()) {
            let mut rev = p.monomials().to_vec();
            rev.reverse();
            prop_assert_eq!(Gf2Poly::new(rev, p.constant_term()), p);
        }
    }
}
