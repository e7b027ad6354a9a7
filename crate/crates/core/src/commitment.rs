//! Fuzzy commitment: bind a binary template to a random codeword.
//!
//! Stored: `mask = template ⊕ c` and `SHA-256(packed(c) ‖ salt)`, where `c`
//! encodes a random message and `salt` is 16 random bytes. A query is accepted
//! when `mask ⊕ query` decodes to a codeword whose salted hash matches, i.e.
//! when it lies within `t` bits of the enrolled template. The template itself
//! is never stored.

use rand::{CryptoRng, Rng};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bch::{CodeError, CodeParams, CodeSpec, Codeword, DecodeOutcome};
use crate::bits::{BitString, BitsError};
use crate::rng::seeded;

pub const SALT_LEN: usize = 16;
pub const DIGEST_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommitmentError {
    #[error("template has {got} bits, code length is {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("commitment was made under {stored:?}, verifier supplied {given:?}")]
    CodeMismatch { stored: CodeSpec, given: CodeSpec },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Bits(#[from] BitsError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commitment {
    pub code: CodeSpec,
    pub mask: BitString,
    /// Big-endian SHA-256 output.
    pub digest: [u8; DIGEST_LEN],
    pub salt: [u8; SALT_LEN],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept { errors_corrected: usize },
    Reject,
}

impl Decision {
    pub fn is_accept(&self) -> bool {
        matches!(self, Decision::Accept { .. })
    }
}

fn digest_of(codeword: &BitString, salt: &[u8; SALT_LEN]) -> [u8; DIGEST_LEN] {
    let mut h = Sha256::new();
    h.update(codeword.to_packed());
    h.update(salt);
    h.finalize().into()
}

fn check_template(params: &CodeParams, template: &BitString) -> Result<(), CommitmentError> {
    if template.len() != params.n() {
        return Err(CommitmentError::LengthMismatch {
            expected: params.n(),
            got: template.len(),
        });
    }
    Ok(())
}

/// Commits with randomness from `rng`: message bits first, then the salt.
pub fn commit<R: CryptoRng + ?Sized>(
    template: &BitString,
    params: &CodeParams,
    rng: &mut R,
) -> Result<Commitment, CommitmentError> {
    check_template(params, template)?;
    let message = BitString::random(rng, params.k_msg());
    let codeword = params.encode(&message)?;
    let mut salt = [0u8; SALT_LEN];
    rng.fill(&mut salt);
    commit_to_codeword(template, params, &codeword, salt)
}

/// [`commit`] driven by the seeded stream.
pub fn commit_seeded(
    template: &BitString,
    params: &CodeParams,
    seed: u64,
) -> Result<Commitment, CommitmentError> {
    commit(template, params, &mut seeded(seed))
}

/// Commitment to a caller-chosen codeword and salt.
pub fn commit_to_codeword(
    template: &BitString,
    params: &CodeParams,
    codeword: &Codeword,
    salt: [u8; SALT_LEN],
) -> Result<Commitment, CommitmentError> {
    check_template(params, template)?;
    Ok(Commitment {
        code: params.spec(),
        mask: template.xor(codeword.bits())?,
        digest: digest_of(codeword.bits(), &salt),
        salt,
    })
}

impl Commitment {
    pub fn verify(&self, params: &CodeParams, query: &BitString) -> Result<Decision, CommitmentError> {
        if params.spec() != self.code {
            return Err(CommitmentError::CodeMismatch {
                stored: self.code,
                given: params.spec(),
            });
        }
        check_template(params, query)?;
        let shifted = self.mask.xor(query)?;
        Ok(match params.decode(&shifted)? {
            DecodeOutcome::Corrected {
                codeword,
                errors_corrected,
            } if digest_of(codeword.bits(), &self.salt) == self.digest => {
                Decision::Accept { errors_corrected }
            }
            _ => Decision::Reject,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bch::build_code;
    use crate::bits::hamming;
    use rand::seq::index;

    #[test]
    fn round_trip_accepts_with_zero_errors() {
        let code = build_code(6, 5).unwrap();
        let mut rng = seeded(1);
        for s in 0..20 {
            let t = BitString::random(&mut rng, 63);
            let c = commit_seeded(&t, &code, s).unwrap();
            assert_eq!(
                c.verify(&code, &t).unwrap(),
                Decision::Accept { errors_corrected: 0 }
            );
        }
    }

    #[test]
    fn fresh_seeds_give_fresh_commitments() {
        let code = build_code(6, 5).unwrap();
        let t = BitString::zeros(63);
        let a = commit_seeded(&t, &code, 1).unwrap();
        let b = commit_seeded(&t, &code, 2).unwrap();
        assert_ne!(a.mask, b.mask);
        assert_ne!(a.digest, b.digest);
        assert_eq!(a, commit_seeded(&t, &code, 1).unwrap());
    }

    #[test]
    fn masks_are_balanced() {
        let code = build_code(6, 5).unwrap();
        let t = BitString::zeros(63);
        let (mut ones, mut total) = (0, 0);
        for s in 0..160 {
            let c = commit_seeded(&t, &code, s).unwrap();
            ones += c.mask.weight();
            total += c.mask.len();
        }
        assert!(total >= 10_000);
        let frac = ones as f64 / total as f64;
        assert!((frac - 0.5).abs() <= 0.05, "{frac}");
    }

    #[test]
    fn flips_up_to_t_accept_with_count() {
        let code = build_code(6, 5).unwrap();
        let mut rng = seeded(4);
        for e in 0..=5 {
            let t = BitString::random(&mut rng, 63);
            let c = commit_seeded(&t, &code, e as u64).unwrap();
            let mut q = t.clone();
            index::sample(&mut rng, 63, e).into_iter().for_each(|i| q.flip(i));
            assert_eq!(
                c.verify(&code, &q).unwrap(),
                Decision::Accept { errors_corrected: e }
            );
        }
    }

    #[test]
    fn distance_three_never_accepts_on_bch_15() {
        let code = build_code(4, 2).unwrap();
        let mut rng = seeded(5);
        let mut accepts = 0;
        for s in 0..10_000u64 {
            let t = BitString::random(&mut rng, 15);
            let c = commit_seeded(&t, &code, s).unwrap();
            let mut q = t.clone();
            index::sample(&mut rng, 15, 3).into_iter().for_each(|i| q.flip(i));
            accepts += c.verify(&code, &q).unwrap().is_accept() as usize;
        }
        assert_eq!(accepts, 0);
    }

    #[test]
    fn uniform_queries_accept_at_ball_rate() {
        // Exactly the 1 + 15 + 105 = 121 words within distance 2 of the
        // enrolled template accept: probability 121 / 2^15.
        let code = build_code(4, 2).unwrap();
        let t = BitString::from_u64(0x1234, 15);
        let c = commit_seeded(&t, &code, 3).unwrap();
        let mut accepted = 0;
        for w in 0..1u64 << 15 {
            let q = BitString::from_u64(w, 15);
            let acc = c.verify(&code, &q).unwrap().is_accept();
            assert_eq!(acc, hamming(&q, &t).unwrap() <= 2);
            accepted += acc as usize;
        }
        assert_eq!(accepted, 121);
    }

    #[test]
    fn length_and_code_errors() {
        let code = build_code(4, 2).unwrap();
        let other = build_code(4, 1).unwrap();
        assert_eq!(
            commit_seeded(&BitString::zeros(14), &code, 0),
            Err(CommitmentError::LengthMismatch {
                expected: 15,
                got: 14
            })
        );
        let c = commit_seeded(&BitString::zeros(15), &code, 0).unwrap();
        assert!(matches!(
            c.verify(&code, &BitString::zeros(16)),
            Err(CommitmentError::LengthMismatch { .. })
        ));
        assert!(matches!(
            c.verify(&other, &BitString::zeros(15)),
            Err(CommitmentError::CodeMismatch { .. })
        ));
    }

    #[test]
    fn os_entropy_path() {
        let code = build_code(5, 3).unwrap();
        let t = BitString::zeros(31);
        let c = commit(&t, &code, &mut rand::rng()).unwrap();
        assert!(c.verify(&code, &t).unwrap().is_accept());
    }
}
