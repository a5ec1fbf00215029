use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-length bitmap over parameter positions with a cached popcount.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskBitmap {
    len: usize,
    words: Vec<u64>,
    cardinality: usize,
}

impl MaskBitmap {
    pub fn new(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)], cardinality: 0 }
    }

    pub fn full(len: usize) -> Self {
        let mut m = Self::new(len);
        for j in 0..len {
            m.set(j);
        }
        m
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Result<Self> {
        let mut m = Self::new(len);
        for &j in indices {
            if j >= len {
                return Err(Error::invalid(format!("index {j} out of range for length {len}")));
            }
            m.set(j);
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        j < self.len && self.words[j / 64] >> (j % 64) & 1 == 1
    }

    /// Sets bit `j`; returns whether it was newly set. Panics when `j` is out of range.
    pub fn set(&mut self, j: usize) -> bool {
        assert!(j < self.len, "bit {j} out of range for length {}", self.len);
        let w = &mut self.words[j / 64];
        let bit = 1u64 << (j % 64);
        let fresh = *w & bit == 0;
        *w |= bit;
        self.cardinality += fresh as usize;
        fresh
    }

    pub fn clear(&mut self, j: usize) -> bool {
        assert!(j < self.len, "bit {j} out of range for length {}", self.len);
        let w = &mut self.words[j / 64];
        let bit = 1u64 << (j % 64);
        let was = *w & bit != 0;
        *w &= !bit;
        self.cardinality -= was as usize;
        was
    }

    /// Set positions in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&j| self.get(j))
    }

    pub fn zeros(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&j| !self.get(j))
    }

    pub fn complement(&self) -> Self {
        let mut m = Self::new(self.len);
        for j in self.zeros() {
            m.set(j);
        }
        m
    }

    pub fn is_subset_of(&self, other: &MaskBitmap) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersection_count(&self, other: &MaskBitmap) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// Serialized size: one bit per position, rounded up to whole bytes.
    pub fn byte_size(&self) -> usize {
        self.len.div_ceil(8)
    }

    /// Little-endian bit order within each byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.byte_size()];
        for j in self.ones() {
            out[j / 8] |= 1 << (j % 8);
        }
        out
    }

    pub fn from_bytes(len: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::invalid(format!(
                "bitmap of length {len} needs {} bytes, got {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        let mut m = Self::new(len);
        for j in 0..len {
            if bytes[j / 8] >> (j % 8) & 1 == 1 {
                m.set(j);
            }
        }
        if !len.is_multiple_of(8) && bytes[len / 8] >> (len % 8) != 0 {
            return Err(Error::invalid("padding bits set in bitmap"));
        }
        Ok(m)
    }
}
