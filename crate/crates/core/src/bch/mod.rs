//! Binary BCH codes over GF(2^m), 3 <= m <= 10.
//!
//! Bit order: bit `i` of a word is the coefficient of `x^i`. Encoding is
//! systematic with the `n - k` parity bits at positions `0..n-k` and message
//! bit `i` at position `n - k + i`. Decoding is bounded-distance: syndromes,
//! Berlekamp-Massey for the error locator, Chien search for its roots.

mod field;

use std::collections::HashSet;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::bits::hamming;
use crate::bits::BitString;
use crate::rng::seeded;
pub use field::{primitive_poly, GaloisField, PRIMITIVE_POLYS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("field degree m={0} outside supported range 3..=10")]
    UnsupportedDegree(u32),
    #[error("t must be at least 1")]
    ZeroT,
    #[error("t={t} leaves {k_msg} message bits for n={n}; at least 2 are required")]
    TooManyErrors { n: usize, t: u32, k_msg: usize },
    #[error("expected {expected} bits, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("requested {requested} distinct codewords but the code has only 2^{k_msg}")]
    NotEnoughCodewords { requested: usize, k_msg: usize },
}

/// Identifies a code: field degree and designed correction capability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeSpec {
    pub m: u32,
    pub t: u32,
}

impl CodeSpec {
    pub fn n(&self) -> usize {
        (1usize << self.m) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeParams {
    spec: CodeSpec,
    n: usize,
    k_msg: usize,
    /// Coefficients of g(x), index = power; length `n - k_msg + 1`.
    generator: BitString,
    field: GaloisField,
}

/// A word with zero syndrome under the code that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codeword(BitString);

impl Codeword {
    pub fn bits(&self) -> &BitString {
        &self.0
    }

    pub fn into_bits(self) -> BitString {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    Corrected {
        codeword: Codeword,
        errors_corrected: usize,
    },
    /// More than `t` errors detected; no codeword returned.
    Failure,
}

impl DecodeOutcome {
    pub fn codeword(&self) -> Option<&Codeword> {
        match self {
            DecodeOutcome::Corrected { codeword, .. } => Some(codeword),
            DecodeOutcome::Failure => None,
        }
    }
}

pub fn build_code(m: u32, t: u32) -> Result<CodeParams, CodeError> {
    if !(3..=10).contains(&m) {
        return Err(CodeError::UnsupportedDegree(m));
    }
    if t == 0 {
        return Err(CodeError::ZeroT);
    }
    let field = GaloisField::new(m);
    let n = field.order();
    let two_t = 2 * t as usize;
    if two_t >= n {
        return Err(CodeError::TooManyErrors { n, t, k_msg: 0 });
    }

    // lcm of the minimal polynomials of α^1..α^2t = product over distinct
    // cyclotomic cosets.
    let mut seen = vec![false; n];
    let mut generator = vec![true];
    for i in 1..=two_t {
        if seen[i] {
            continue;
        }
        let mut coset = Vec::new();
        let mut j = i;
        while !seen[j] {
            seen[j] = true;
            coset.push(j);
            j = (2 * j) % n;
        }
        generator = gf2_mul(&generator, &minimal_polynomial(&field, &coset));
    }

    let k_msg = n + 1 - generator.len();
    // A single message bit is the repetition code; it cannot index distinct
    // class targets, so it is rejected along with the empty code.
    if k_msg < 2 {
        return Err(CodeError::TooManyErrors { n, t, k_msg });
    }
    Ok(CodeParams {
        spec: CodeSpec { m, t },
        n,
        k_msg,
        generator: BitString::from_bools(generator),
        field,
    })
}

/// ∏_{j ∈ coset} (x + α^j), whose coefficients all lie in GF(2).
fn minimal_polynomial(field: &GaloisField, coset: &[usize]) -> Vec<bool> {
    let mut poly: Vec<u16> = vec![1];
    for &j in coset {
        let root = field.antilog(j);
        let mut next = vec![0u16; poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i + 1] ^= c;
            next[i] ^= field.mul(c, root);
        }
        poly = next;
    }
    poly.iter()
        .map(|&c| {
            debug_assert!(c <= 1, "minimal polynomial coefficient outside GF(2)");
            c == 1
        })
        .collect()
}

fn gf2_mul(a: &[bool], b: &[bool]) -> Vec<bool> {
    let mut out = vec![false; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= y;
            }
        }
    }
    out
}

impl CodeParams {
    pub fn spec(&self) -> CodeSpec {
        self.spec
    }

    pub fn m(&self) -> u32 {
        self.spec.m
    }

    pub fn t(&self) -> usize {
        self.spec.t as usize
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_msg(&self) -> usize {
        self.k_msg
    }

    /// Designed minimum distance, `2t + 1`.
    pub fn d_min(&self) -> usize {
        2 * self.t() + 1
    }

    pub fn generator(&self) -> &BitString {
        &self.generator
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    fn check_len(&self, bits: &BitString, expected: usize) -> Result<(), CodeError> {
        if bits.len() != expected {
            return Err(CodeError::WrongLength {
                expected,
                got: bits.len(),
            });
        }
        Ok(())
    }

    pub fn encode(&self, message: &BitString) -> Result<Codeword, CodeError> {
        self.check_len(message, self.k_msg)?;
        let parity_len = self.n - self.k_msg;
        let mut word = vec![false; self.n];
        for i in 0..self.k_msg {
            word[parity_len + i] = message.get(i);
        }
        // Remainder of m(x)·x^(n-k) divided by g(x), long division from the top.
        let g = self.generator.as_slice();
        let mut rem = word.clone();
        for i in (parity_len..self.n).rev() {
            if rem[i] {
                for (j, &gj) in g.iter().enumerate() {
                    rem[i - parity_len + j] ^= gj;
                }
            }
        }
        word[..parity_len].copy_from_slice(&rem[..parity_len]);
        Ok(Codeword(BitString::from_bools(word)))
    }

    /// Message bits of a codeword (its systematic part).
    pub fn message_of(&self, codeword: &Codeword) -> BitString {
        codeword.0.slice(self.n - self.k_msg, self.k_msg)
    }

    /// `S_i = r(α^i)` for `i = 1..=2t`.
    pub fn syndromes(&self, word: &BitString) -> Result<Vec<u16>, CodeError> {
        self.check_len(word, self.n)?;
        let f = &self.field;
        Ok((1..=2 * self.t())
            .map(|i| {
                word.iter()
                    .enumerate()
                    .filter(|(_, b)| *b)
                    .fold(0u16, |acc, (j, _)| acc ^ f.antilog(i * j % self.n))
            })
            .collect())
    }

    pub fn is_codeword(&self, word: &BitString) -> Result<bool, CodeError> {
        Ok(self.syndromes(word)?.iter().all(|&s| s == 0))
    }

    /// Validates a word and wraps it as a codeword.
    pub fn to_codeword(&self, word: BitString) -> Result<Option<Codeword>, CodeError> {
        Ok(self.is_codeword(&word)?.then_some(Codeword(word)))
    }

    pub fn decode(&self, word: &BitString) -> Result<DecodeOutcome, CodeError> {
        let syndromes = self.syndromes(word)?;
        if syndromes.iter().all(|&s| s == 0) {
            return Ok(DecodeOutcome::Corrected {
                codeword: Codeword(word.clone()),
                errors_corrected: 0,
            });
        }
        let (locator, len) = berlekamp_massey(&self.field, &syndromes);
        if len > self.t() || locator.len() != len + 1 {
            return Ok(DecodeOutcome::Failure);
        }
        let positions = chien_search(&self.field, &locator, self.n);
        if positions.len() != len {
            return Ok(DecodeOutcome::Failure);
        }
        let mut corrected = word.clone();
        positions.iter().for_each(|&p| corrected.flip(p));
        // Guard against a locator that is consistent but does not clear the syndrome.
        if !self.is_codeword(&corrected)? {
            return Ok(DecodeOutcome::Failure);
        }
        Ok(DecodeOutcome::Corrected {
            codeword: Codeword(corrected),
            errors_corrected: len,
        })
    }

    /// `count` distinct codewords from encoding distinct seeded messages.
    pub fn random_codewords(&self, count: usize, seed: u64) -> Result<Vec<Codeword>, CodeError> {
        let mut rng = seeded(seed);
        self.check_capacity(count)?;
        let messages: Vec<BitString> = if self.k_msg <= 20 {
            index::sample(&mut rng, 1usize << self.k_msg, count)
                .into_iter()
                .map(|i| BitString::from_u64(i as u64, self.k_msg))
                .collect()
        } else {
            let mut seen = HashSet::with_capacity(count);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let msg = BitString::random(&mut rng, self.k_msg);
                if seen.insert(msg.clone()) {
                    out.push(msg);
                }
            }
            out
        };
        messages.iter().map(|m| self.encode(m)).collect()
    }

    pub(crate) fn check_capacity(&self, count: usize) -> Result<(), CodeError> {
        if self.k_msg < usize::BITS as usize - 1 && count > 1usize << self.k_msg {
            return Err(CodeError::NotEnoughCodewords {
                requested: count,
                k_msg: self.k_msg,
            });
        }
        Ok(())
    }
}

/// Error locator Λ(x) (coefficients, trailing zeros trimmed) and its linear
/// complexity `L`.
fn berlekamp_massey(f: &GaloisField, s: &[u16]) -> (Vec<u16>, usize) {
    let mut c = vec![1u16];
    let mut b = vec![1u16];
    let mut len = 0usize;
    let mut shift = 1usize;
    let mut last_disc = 1u16;
    for step in 0..s.len() {
        let mut disc = s[step];
        for i in 1..=len.min(c.len() - 1) {
            disc ^= f.mul(c[i], s[step - i]);
        }
        if disc == 0 {
            shift += 1;
            continue;
        }
        let coef = f.div(disc, last_disc);
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + shift] ^= f.mul(coef, bi);
        }
        if 2 * len <= step {
            len = step + 1 - len;
            b = prev;
            last_disc = disc;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    while c.len() > 1 && *c.last().unwrap() == 0 {
        c.pop();
    }
    (c, len)
}

/// Positions `j` with Λ(α^-j) = 0.
fn chien_search(f: &GaloisField, locator: &[u16], n: usize) -> Vec<usize> {
    (0..n)
        .filter(|&j| {
            locator.iter().enumerate().fold(0u16, |acc, (i, &c)| {
                acc ^ f.mul(c, f.alpha_pow(-((i * j) as i64)))
            }) == 0
        })
        .collect()
}

#[cfg(test)]
mod tests;
