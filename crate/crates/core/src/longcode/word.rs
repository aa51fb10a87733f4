use crate::{Error, Result};

/// Largest domain whose function space is materialized (`|F_4| = 65536`).
pub const MAX_DOMAIN_BITS: u32 = 4;

/// The functions from `n` bits to one bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FunctionSpace {
    n: u32,
}

impl FunctionSpace {
    pub fn new(n: u32) -> Result<Self> {
        if n > MAX_DOMAIN_BITS {
            return Err(Error::SizeCap(format!("domain of {n} bits exceeds {MAX_DOMAIN_BITS}")));
        }
        Ok(FunctionSpace { n })
    }

    pub fn n(self) -> u32 {
        self.n
    }

    /// `2^n` inputs.
    pub fn points(self) -> u32 {
        1 << self.n
    }

    /// `|F_n| = 2^(2^n)`.
    pub fn size(self) -> usize {
        1usize << self.points()
    }

    pub fn functions(self) -> impl Iterator<Item = u32> {
        0..self.size() as u32
    }

    /// The constant-one function.
    pub fn one(self) -> u32 {
        (self.size() - 1) as u32
    }

    pub fn eval(self, f: u32, x: u32) -> bool {
        (f >> x) & 1 == 1
    }

    /// Sort key of the total order on functions: lexicographic on
    /// `(f(0), f(1), …)`.
    pub fn key(self, f: u32) -> u32 {
        f.reverse_bits() >> (32 - self.points())
    }

    pub fn from_fn(self, f: impl Fn(u32) -> bool) -> u32 {
        (0..self.points()).fold(0, |acc, x| acc | ((f(x) as u32) << x))
    }

    /// `x ↦ g'(x_pos)` for a function `g'` on one bit.
    pub fn lift_single(self, g: u32, pos: u32) -> u32 {
        self.from_fn(|x| (g >> ((x >> pos) & 1)) & 1 == 1)
    }
}

/// A table with one bit per function of `F_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LongCodeWord {
    pub space: FunctionSpace,
    bits: Vec<u64>,
}

impl LongCodeWord {
    pub fn zeros(space: FunctionSpace) -> Self {
        LongCodeWord { space, bits: vec![0; space.size().div_ceil(64)] }
    }

    pub fn from_fn(space: FunctionSpace, f: impl Fn(u32) -> bool) -> Self {
        let mut w = LongCodeWord::zeros(space);
        for g in space.functions() {
            w.set(g, f(g));
        }
        w
    }

    /// A table from its low-order bits (`|F_n| ≤ 64`).
    pub fn from_u64(space: FunctionSpace, value: u64) -> Self {
        LongCodeWord::from_fn(space, |f| (value >> f) & 1 == 1)
    }

    pub fn get(&self, f: u32) -> bool {
        (self.bits[f as usize / 64] >> (f % 64)) & 1 == 1
    }

    pub fn set(&mut self, f: u32, value: bool) {
        let (w, b) = (f as usize / 64, f % 64);
        self.bits[w] = (self.bits[w] & !(1 << b)) | ((value as u64) << b);
    }

    pub fn len(&self) -> usize {
        self.space.size()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.bits
    }

    pub(crate) fn from_words(space: FunctionSpace, bits: Vec<u64>) -> Self {
        LongCodeWord { space, bits }
    }

    /// Number of positions where the two tables differ.
    pub fn hamming(&self, other: &LongCodeWord) -> u64 {
        self.bits.iter().zip(&other.bits).map(|(a, b)| (a ^ b).count_ones() as u64).sum()
    }
}

/// `A_f = f(x)` for every `f ∈ F_n`.
pub fn encode_long_code(n: u32, x: u32) -> Result<LongCodeWord> {
    let space = FunctionSpace::new(n)?;
    if x >= space.points() {
        return Err(Error::InvalidParameter(format!("point {x} outside a {n}-bit domain")));
    }
    Ok(LongCodeWord::from_fn(space, |f| space.eval(f, x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_bit_domain() {
        let w = encode_long_code(1, 0).unwrap();
        let s = w.space;
        // const0, const1, identity, negation
        let order = [0, s.one(), s.from_fn(|x| x == 1), s.from_fn(|x| x == 0)];
        assert_eq!(order.map(|f| w.get(f) as u8), [0, 1, 0, 1]);
    }

    #[test]
    fn distinct_points_differ_in_half() {
        for n in 1..=3 {
            let points = 1u32 << n;
            for x in 0..points {
                for y in x + 1..points {
                    let (a, b) = (encode_long_code(n, x).unwrap(), encode_long_code(n, y).unwrap());
                    assert_eq!(a.hamming(&b) * 2, a.len() as u64);
                }
            }
        }
    }

    #[test]
    fn order_is_lexicographic_on_values() {
        let s = FunctionSpace::new(2).unwrap();
        // f(0) is the most significant position.
        assert!(s.key(s.from_fn(|x| x == 3)) < s.key(s.from_fn(|x| x == 0)));
        assert_eq!(s.key(0), 0);
        assert_eq!(s.key(s.one()), s.one());
        assert!(FunctionSpace::new(5).is_err());
    }
}
