use num_traits::{One, Zero};
use rayon::prelude::*;

use super::word::{encode_long_code, FunctionSpace, LongCodeWord};
use crate::csp::{ratio, Weight};
use crate::{Error, Result};

/// Fraction of positions where the tables differ.
pub fn distance(a: &LongCodeWord, b: &LongCodeWord) -> Result<Weight> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(ratio(a.hamming(b) as i64, a.len() as i64))
}

/// Index and distance of the nearest codeword; ties go to the earliest.
pub fn nearest_in_code(a: &LongCodeWord, codewords: &[LongCodeWord]) -> Result<(usize, Weight)> {
    let mut best: Option<(usize, Weight)> = None;
    for (i, c) in codewords.iter().enumerate() {
        let d = distance(a, c)?;
        if best.as_ref().is_none_or(|(_, b)| d < *b) {
            best = Some((i, d));
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("empty code".into()))
}

/// Lower bound on the linearity-test failure fraction at distance `x` from the
/// nearest linear function: `3x − 6x²` up to `5/16`, then `45/128` up to
/// `45/128`, then `x`.
pub fn delta_lower_bound(x: Weight) -> Result<Weight> {
    if x < Weight::zero() || x > Weight::one() {
        return Err(Error::InvalidParameter(format!("distance {x} outside [0, 1]")));
    }
    Ok(if x <= ratio(5, 16) {
        ratio(3, 1) * x - ratio(6, 1) * x * x
    } else if x <= ratio(45, 128) {
        ratio(45, 128)
    } else {
        x
    })
}

/// Fraction of pairs `(f, g)` with `A_f + A_g ≠ A_{f+g}`, over all pairs.
pub fn linearity_failure(a: &LongCodeWord) -> Result<Weight> {
    let size = a.len() as u64;
    if a.space.n() > 3 {
        return Err(Error::SizeCap("linearity scan limited to domains of 3 bits".into()));
    }
    let fails: u64 = (0..size as u32)
        .into_par_iter()
        .map(|f| (0..size as u32).filter(|&g| a.get(f) ^ a.get(g) != a.get(f ^ g)).count() as u64)
        .sum();
    Ok(ratio(fails as i64, (size * size) as i64))
}

/// Affine functions of `F_n` (as a vector space over GF(2)) that are folded
/// over true: `f ↦ Σ_{x∈S} f(x) (+1)` with `|S|` odd. Long codes are the
/// singletons `S = {x}`.
pub fn folded_affine_codewords(space: FunctionSpace) -> Vec<LongCodeWord> {
    let mut out = Vec::new();
    for set in 0..1u32 << space.points() {
        if set.count_ones() % 2 == 1 {
            for c in [false, true] {
                out.push(LongCodeWord::from_fn(space, |f| ((f & set).count_ones() % 2 == 1) ^ c));
            }
        }
    }
    out
}

/// Number of long codes within distance `radius` of `a`.
pub fn count_close_long_codes(a: &LongCodeWord, radius: Weight) -> Result<usize> {
    let n = a.space.n();
    let mut count = 0;
    for x in 0..a.space.points() {
        if distance(a, &encode_long_code(n, x)?)? <= radius {
            count += 1;
        }
    }
    Ok(count)
}

/// Whether `(A, D)` are `(1/2 − δ)`-close to the long codes of some
/// satisfying `x` (per `satisfies`) and of its bit `pos`.
pub fn is_solid(
    a: &LongCodeWord,
    d: &LongCodeWord,
    satisfies: impl Fn(u32) -> bool,
    pos: u32,
    delta: Weight,
) -> Result<bool> {
    if d.space.n() != 1 || pos >= a.space.n() {
        return Err(Error::InvalidParameter("D must be a one-bit table of a bit of A's domain".into()));
    }
    let radius = ratio(1, 2) - delta;
    let n = a.space.n();
    for x in 0..a.space.points() {
        if !satisfies(x) || distance(a, &encode_long_code(n, x)?)? > radius {
            continue;
        }
        if distance(d, &encode_long_code(1, (x >> pos) & 1)?)? <= radius {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::super::folding::FoldingBasis;
    use super::*;

    #[test]
    fn delta_values() {
        assert_eq!(delta_lower_bound(Weight::zero()).unwrap(), Weight::zero());
        assert_eq!(delta_lower_bound(ratio(5, 16)).unwrap(), ratio(45, 128));
        assert_eq!(delta_lower_bound(ratio(1, 2)).unwrap(), ratio(1, 2));
        assert!(delta_lower_bound(ratio(3, 2)).is_err());
    }

    #[test]
    fn distance_extremes() {
        let a = encode_long_code(2, 1).unwrap();
        let mut c = a.clone();
        for f in a.space.functions() {
            c.set(f, !a.get(f));
        }
        assert_eq!(distance(&a, &a).unwrap(), Weight::zero());
        assert_eq!(distance(&a, &c).unwrap(), Weight::one());
        assert!(distance(&a, &encode_long_code(1, 0).unwrap()).is_err());
    }

    #[test]
    fn folded_words_far_from_wrong_long_codes() {
        let s = FunctionSpace::new(2).unwrap();
        for h in 1..s.size() as u32 {
            for b in [false, true] {
                let basis = FoldingBasis::new(s, vec![(h, b)]).unwrap();
                let reps = basis.representatives();
                for bits in 0..1u32 << reps.len() {
                    let mut stored = LongCodeWord::zeros(s);
                    for (i, &r) in reps.iter().enumerate() {
                        stored.set(r, (bits >> i) & 1 == 1);
                    }
                    let folded = basis.fold(&stored);
                    for x in (0..4).filter(|&x| s.eval(h, x) != b) {
                        assert!(distance(&folded, &encode_long_code(2, x).unwrap()).unwrap() >= ratio(1, 2));
                    }
                }
            }
        }
    }

    #[test]
    fn solidity_of_honest_and_dishonest_pairs() {
        let sat = |x: u32| x & 1 == 1;
        let a = encode_long_code(2, 3).unwrap();
        let d = encode_long_code(1, 1).unwrap();
        assert!(is_solid(&a, &d, sat, 1, ratio(1, 100)).unwrap());
        let bad = encode_long_code(2, 2).unwrap();
        assert!(!is_solid(&bad, &encode_long_code(1, 1).unwrap(), sat, 1, ratio(1, 100)).unwrap());
    }

    #[test]
    fn linear_words_pass_linearity() {
        let s = FunctionSpace::new(2).unwrap();
        for w in folded_affine_codewords(s).iter().step_by(2) {
            assert_eq!(linearity_failure(w).unwrap(), Weight::zero());
        }
        assert_eq!(folded_affine_codewords(s).len(), 16);
    }
}
