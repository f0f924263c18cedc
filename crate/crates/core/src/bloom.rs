//! Fixed-length bit vectors used as record-level Bloom filters.

use std::fmt;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// A fixed-length bit vector. Bits past `len` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BloomFilter {
    words: Vec<u64>,
    len: usize,
}

impl BloomFilter {
    /// An all-zero filter of `len` bits.
    ///
    /// Panics if `len` is zero.
    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "bloom filter length must be positive");
        BloomFilter {
            words: vec![0; len.div_ceil(WORD_BITS)],
            len,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut bf = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                bf.set(i);
            }
        }
        bf
    }

    /// Builds a filter with the given bit positions set.
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bf = Self::zeros(len);
        for i in indices {
            if i >= len {
                return Err(Error::param(format!("bit index {i} out of range for length {len}")));
            }
            bf.set(i);
        }
        Ok(bf)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(())
    }

    /// Popcount of the bitwise AND.
    pub fn and_count(&self, other: &Self) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum())
    }

    /// Number of positions where the two filters differ. For binary vectors
    /// this equals the squared Euclidean distance.
    pub fn hamming(&self, other: &Self) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD_BITS + tz)
            })
        })
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Writes the filter as 0.0/1.0 values into `out`, which must hold `len` entries.
    pub fn write_dense(&self, out: &mut [f32]) {
        assert_eq!(out.len(), self.len);
        out.fill(0.0);
        for i in self.iter_ones() {
            out[i] = 1.0;
        }
    }

    /// Lowercase hex, bit 0 as the most significant bit of the first byte,
    /// zero-padded to a whole number of bytes.
    pub fn to_hex(&self) -> String {
        let nbytes = self.len.div_ceil(8);
        let mut s = String::with_capacity(nbytes * 2);
        for byte_idx in 0..nbytes {
            let mut byte = 0u8;
            for bit in 0..8 {
                let i = byte_idx * 8 + bit;
                if i < self.len && self.get(i) {
                    byte |= 0x80 >> bit;
                }
            }
            s.push_str(&format!("{byte:02x}"));
        }
        s
    }

    /// Inverse of [`BloomFilter::to_hex`]. Rejects wrong widths, non-hex
    /// characters and set padding bits.
    pub fn from_hex(len: usize, hex: &str) -> Result<Self> {
        if len == 0 {
            return Err(Error::param("bloom filter length must be positive"));
        }
        let nbytes = len.div_ceil(8);
        if hex.len() != nbytes * 2 {
            return Err(Error::param(format!(
                "expected {} hex characters for {len} bits, got {}",
                nbytes * 2,
                hex.len()
            )));
        }
        let mut bf = Self::zeros(len);
        for byte_idx in 0..nbytes {
            let pair = &hex[byte_idx * 2..byte_idx * 2 + 2];
            if !pair.bytes().all(|c| c.is_ascii_digit() || (b'a'..=b'f').contains(&c)) {
                return Err(Error::param(format!("invalid hex byte {pair:?}")));
            }
            let byte = u8::from_str_radix(pair, 16)
                .map_err(|_| Error::param(format!("invalid hex byte {pair:?}")))?;
            for bit in 0..8 {
                if byte & (0x80 >> bit) != 0 {
                    let i = byte_idx * 8 + bit;
                    if i >= len {
                        return Err(Error::param("padding bits must be zero"));
                    }
                    bf.set(i);
                }
            }
        }
        Ok(bf)
    }
}

impl fmt::Debug for BloomFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BloomFilter({}b, {})", self.len, self.to_hex())
    }
}
