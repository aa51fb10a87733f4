use super::oblivious::Equality;
use super::word::{FunctionSpace, LongCodeWord};
use crate::{Error, Result};

/// Folding over `(h_1, b_1), …, (h_k, b_k)`: the virtual table
/// `B_f = A_{μ(f)} + Σ σ_i^f b_i`, where `μ(f) = f + Σ σ_i^f h_i` is the least
/// function of the coset `f + span{h_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FoldingBasis {
    pub space: FunctionSpace,
    pub pairs: Vec<(u32, bool)>,
}

impl FoldingBasis {
    /// Errors unless the `h_i` are linearly independent functions of `space`.
    pub fn new(space: FunctionSpace, pairs: Vec<(u32, bool)>) -> Result<Self> {
        let mut reduced: Vec<u32> = Vec::new();
        for &(h, _) in &pairs {
            if h as usize >= space.size() {
                return Err(Error::InvalidParameter(format!("function {h} outside F_{}", space.n())));
            }
            let mut x = h;
            for &r in &reduced {
                x = x.min(x ^ r);
            }
            if x == 0 {
                return Err(Error::DependentBasis);
            }
            reduced.push(x);
            reduced.sort_unstable_by(|a, b| b.cmp(a));
        }
        Ok(FoldingBasis { space, pairs })
    }

    /// Folding over true: `(1, 1)`.
    pub fn over_true(space: FunctionSpace) -> Self {
        FoldingBasis { space, pairs: vec![(space.one(), true)] }
    }

    pub fn empty(space: FunctionSpace) -> Self {
        FoldingBasis { space, pairs: Vec::new() }
    }

    /// `(μ(f), σ^f)` with `σ^f` as a bit mask over the basis.
    pub fn mu(&self, f: u32) -> (u32, u32) {
        let k = self.pairs.len() as u32;
        let mut best = (self.space.key(f), f, 0u32);
        for sigma in 1..1u32 << k {
            let g = self.pairs.iter().enumerate().fold(f, |g, (i, &(h, _))| if (sigma >> i) & 1 == 1 { g ^ h } else { g });
            let key = self.space.key(g);
            if key < best.0 {
                best = (key, g, sigma);
            }
        }
        (best.1, best.2)
    }

    /// `Σ σ_i b_i`.
    pub fn offset(&self, sigma: u32) -> bool {
        self.pairs.iter().enumerate().fold(false, |acc, (i, &(_, b))| acc ^ ((sigma >> i) & 1 == 1 && b))
    }

    /// Reads `B_f` from the stored table `A`; only `A_{μ(f)}` is accessed.
    pub fn read(&self, stored: &LongCodeWord, f: u32) -> bool {
        let (rep, sigma) = self.mu(f);
        stored.get(rep) ^ self.offset(sigma)
    }

    /// The whole virtual table `B`.
    pub fn fold(&self, stored: &LongCodeWord) -> LongCodeWord {
        LongCodeWord::from_fn(self.space, |f| self.read(stored, f))
    }

    /// Coset representatives in increasing id order.
    pub fn representatives(&self) -> Vec<u32> {
        self.space.functions().filter(|&f| self.mu(f).0 == f).collect()
    }

    /// Same functions, new constants.
    pub fn with_constants(&self, bs: &[bool]) -> Result<Self> {
        if bs.len() != self.pairs.len() {
            return Err(Error::LengthMismatch(self.pairs.len(), bs.len()));
        }
        Ok(FoldingBasis { space: self.space, pairs: self.pairs.iter().zip(bs).map(|(&(h, _), &b)| (h, b)).collect() })
    }
}

/// Folding of a long code over the two bits `(y, x)` of an equality
/// constraint: over true and over `(y + x, negated)`. Negating the source
/// literal changes the constant only.
pub fn equality_folding(eq: &Equality) -> FoldingBasis {
    let space = FunctionSpace::new(2).expect("two bits");
    let h = space.from_fn(|v| (v & 1) ^ ((v >> 1) & 1) == 1);
    FoldingBasis { space, pairs: vec![(space.one(), true), (h, eq.negated)] }
}

#[cfg(test)]
mod tests {
    use super::super::word::encode_long_code;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn over_true_reads_complements() {
        let s = FunctionSpace::new(2).unwrap();
        let basis = FoldingBasis::over_true(s);
        for a in [0u64, 0x1234, 0xffff, 0xa5a5] {
            let stored = LongCodeWord::from_u64(s, a);
            for f in s.functions() {
                assert_ne!(basis.read(&stored, f), basis.read(&stored, f ^ s.one()));
            }
        }
        assert_eq!(basis.representatives().len(), 8);
    }

    #[test]
    fn constant_flip_keeps_location() {
        let s = FunctionSpace::new(2).unwrap();
        let h = s.from_fn(|x| x == 1 || x == 2);
        let a = FoldingBasis::new(s, vec![(s.one(), true), (h, false)]).unwrap();
        let b = a.with_constants(&[true, true]).unwrap();
        let stored = LongCodeWord::from_u64(s, 0x9c31);
        for f in s.functions() {
            let (rep, sigma) = a.mu(f);
            assert_eq!(b.mu(f), (rep, sigma));
            assert_eq!(a.read(&stored, f) != b.read(&stored, f), (sigma >> 1) & 1 == 1);
        }
    }

    #[test]
    fn long_code_consistent_with_folding_reads_directly() {
        let s = FunctionSpace::new(2).unwrap();
        for h in 1..s.size() as u32 {
            for x in 0..4 {
                let b = s.eval(h, x);
                let lc = encode_long_code(2, x).unwrap();
                let basis = FoldingBasis::new(s, vec![(h, b)]).unwrap();
                for f in s.functions() {
                    assert_eq!(basis.read(&lc, f), lc.get(f));
                }
            }
        }
    }

    #[test]
    fn dependent_basis_rejected() {
        let s = FunctionSpace::new(2).unwrap();
        assert_eq!(FoldingBasis::new(s, vec![(3, true), (5, false), (6, true)]), Err(Error::DependentBasis));
        assert_eq!(FoldingBasis::new(s, vec![(0, true)]), Err(Error::DependentBasis));
        assert!(FoldingBasis::new(s, vec![(3, true), (5, false)]).is_ok());
    }

    #[test]
    fn empty_basis_reads_table() {
        let lc = encode_long_code(2, 3).unwrap();
        assert_eq!(FoldingBasis::empty(lc.space).fold(&lc), lc);
    }

    fn independent(space: FunctionSpace, hs: &[u32]) -> bool {
        FoldingBasis::new(space, hs.iter().map(|&h| (h, false)).collect()).is_ok()
    }

    proptest! {
        #[test]
        fn folding_identity(n in 1u32..=3, raw in prop::collection::vec((any::<u32>(), any::<bool>()), 1..4), seed in any::<u64>()) {
            let s = FunctionSpace::new(n).unwrap();
            let pairs: Vec<(u32, bool)> = raw.iter().map(|&(h, b)| (h % s.size() as u32, b)).collect();
            let hs: Vec<u32> = pairs.iter().map(|p| p.0).collect();
            prop_assume!(independent(s, &hs));
            let basis = FoldingBasis::new(s, pairs.clone()).unwrap();
            let stored = LongCodeWord::from_fn(s, |f| (seed.rotate_left(f % 64) ^ f as u64) & 1 == 1);
            let b = basis.fold(&stored);
            for f in s.functions() {
                for &(h, bit) in &pairs {
                    prop_assert_eq!(b.get(f ^ h), b.get(f) ^ bit);
                }
            }
        }
    }
}
