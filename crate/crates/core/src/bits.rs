//! Fixed-length bit strings.
//!
//! Bit `i` is the coefficient of `x^i` when a string is read as a polynomial
//! over GF(2). Packing to bytes is most-significant-bit first: bit 0 lands in
//! the top bit of byte 0, and the final byte is zero-padded at the bottom.

use std::fmt;
use std::ops::BitXor;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("bit string length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("packed buffer holds {got} bytes, {bits} bits need {need}")]
    PackedLength { bits: usize, got: usize, need: usize },
    #[error("padding bits of packed buffer are not zero")]
    NonZeroPadding,
    #[error("invalid character {0:?} in bit string")]
    BadChar(char),
}

#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString(vec![false; len])
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    /// Lowest `len` bits of `value`, bit 0 first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        BitString((0..len).map(|i| (value >> i) & 1 == 1).collect())
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Self {
        BitString((0..len).map(|_| rng.random::<bool>()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Bits as an integer, bit 0 least significant. Only valid for `len <= 64`.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len() <= 64);
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString, BitsError> {
        self.check_len(other)?;
        Ok(BitString(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }

    pub fn slice(&self, start: usize, len: usize) -> BitString {
        BitString(self.0[start..start + len].to_vec())
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a BitString>) -> BitString {
        BitString(parts.into_iter().flat_map(|p| p.0.iter().copied()).collect())
    }

    /// Splits into consecutive chunks of `len` bits. The length must divide evenly.
    pub fn chunks(&self, len: usize) -> Vec<BitString> {
        assert!(len > 0 && self.len().is_multiple_of(len));
        self.0.chunks(len).map(|c| BitString(c.to_vec())).collect()
    }

    pub fn to_packed(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len().div_ceil(8)];
        for (i, &b) in self.0.iter().enumerate() {
            if b {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn from_packed(bytes: &[u8], len: usize) -> Result<BitString, BitsError> {
        let need = len.div_ceil(8);
        if bytes.len() != need {
            return Err(BitsError::PackedLength {
                bits: len,
                got: bytes.len(),
                need,
            });
        }
        let bits: Vec<bool> = (0..len).map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0).collect();
        if !len.is_multiple_of(8) {
            let pad_mask = 0xffu8 >> (len % 8);
            if bytes[need - 1] & pad_mask != 0 {
                return Err(BitsError::NonZeroPadding);
            }
        }
        Ok(BitString(bits))
    }

    fn check_len(&self, other: &BitString) -> Result<(), BitsError> {
        if self.len() != other.len() {
            return Err(BitsError::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        BitString(bits)
    }
}

impl BitXor for &BitString {
    type Output = BitString;

    /// Panics on length mismatch; use [`BitString::xor`] for a checked version.
    fn bitxor(self, rhs: &BitString) -> BitString {
        self.xor(rhs).expect("xor of bit strings with different lengths")
    }
}

impl std::str::FromStr for BitString {
    type Err = BitsError;

    /// Parses `"1011"` as bits 0..3 in reading order.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(BitsError::BadChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// Number of positions where `a` and `b` differ.
pub fn hamming(a: &BitString, b: &BitString) -> Result<usize, BitsError> {
    a.check_len(b)?;
    Ok(a.0.iter().zip(&b.0).filter(|(x, y)| x != y).count())
}
