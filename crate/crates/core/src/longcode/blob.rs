use super::folding::FoldingBasis;
use super::word::{FunctionSpace, LongCodeWord};
use crate::{Error, Result};

/// `u32 n`, `u32 basis count` (little endian), one `u32` per basis pair
/// (`h | b << 31`), then the table bits LSB-first.
pub fn write_blob(word: &LongCodeWord, basis: &[(u32, bool)]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend(word.space.n().to_le_bytes());
    out.extend((basis.len() as u32).to_le_bytes());
    for &(h, b) in basis {
        out.extend((h | ((b as u32) << 31)).to_le_bytes());
    }
    let bytes = word.len().div_ceil(8);
    out.extend(word.words().iter().flat_map(|w| w.to_le_bytes()).take(bytes));
    out
}

pub fn read_blob(bytes: &[u8]) -> Result<(LongCodeWord, FoldingBasis)> {
    let word_at = |i: usize| -> Result<u32> {
        let chunk = bytes.get(i..i + 4).ok_or_else(|| Error::InvalidParameter("truncated blob header".into()))?;
        Ok(u32::from_le_bytes(chunk.try_into().expect("4 bytes")))
    };
    let space = FunctionSpace::new(word_at(0)?)?;
    let count = word_at(4)? as usize;
    let mut pairs = Vec::with_capacity(count.min(64));
    for i in 0..count {
        let raw = word_at(8 + 4 * i)?;
        pairs.push((raw & !(1 << 31), raw >> 31 == 1));
    }
    let basis = if pairs.is_empty() { FoldingBasis::empty(space) } else { FoldingBasis::new(space, pairs)? };
    let start = 8 + 4 * count;
    let len = space.size().div_ceil(8);
    let body = bytes.get(start..).filter(|b| b.len() == len).ok_or(Error::LengthMismatch(len, bytes.len().saturating_sub(start)))?;
    let mut words = vec![0u64; space.size().div_ceil(64)];
    for (i, &byte) in body.iter().enumerate() {
        words[i / 8] |= (byte as u64) << (8 * (i % 8));
    }
    Ok((LongCodeWord::from_words(space, words), basis))
}

#[cfg(test)]
mod tests {
    use super::super::word::encode_long_code;
    use super::*;

    #[test]
    fn round_trip() {
        for n in 0..=4 {
            let w = encode_long_code(n, 0).unwrap();
            let space = w.space;
            let basis = if n > 0 { vec![(space.one(), true)] } else { vec![] };
            let bytes = write_blob(&w, &basis);
            assert_eq!(bytes.len(), 8 + 4 * basis.len() + space.size().div_ceil(8));
            let (back, b) = read_blob(&bytes).unwrap();
            assert_eq!(back, w);
            assert_eq!(b.pairs, basis);
        }
        assert!(read_blob(&[1, 0, 0]).is_err());
    }
}
