//! Binary discriminant analysis: one perceptron per output bit, trained so
//! that a class's projected samples binarize to that class's target codeword.
//!
//! Training is deterministic: zero initial weights, samples visited in the
//! given order, bits in index order, and a score of exactly zero binarizes
//! to 0.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bch::{CodeError, CodeParams, Codeword};
use crate::bits::{hamming, BitString, BitsError};
use crate::vectors::dot;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BdaError {
    #[error("no training samples")]
    NoSamples,
    #[error("sample has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("target has {got} bits, expected {expected}")]
    TargetLength { expected: usize, got: usize },
    #[error("learning rate must be positive and finite")]
    BadRate,
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Bits(#[from] BitsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub epochs: u32,
    pub rate: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            epochs: 200,
            rate: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub epochs_run: u32,
    /// Bits of the class's own samples that still miss the target.
    pub residual_bit_errors: u32,
    /// Every training sample (including background) reproduces its label exactly.
    pub converged: bool,
}

/// Per-bit linear discriminants for one class. The target codeword is not
/// part of the model: it is the secret the binarization approximates.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassModel {
    pub class_id: String,
    /// Input (projected) dimension.
    pub k: usize,
    /// Row-major `n x k`, one row per output bit.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub train_meta: TrainMeta,
}

/// One training example: a projected sample and the bits it should map to.
#[derive(Debug, Clone, Copy)]
pub struct Labeled<'a> {
    pub values: &'a [f64],
    pub target: &'a BitString,
}

impl ClassModel {
    /// Number of output bits.
    pub fn n(&self) -> usize {
        self.biases.len()
    }

    pub fn weight_row(&self, bit: usize) -> &[f64] {
        &self.weights[bit * self.k..(bit + 1) * self.k]
    }

    pub fn binarize(&self, query: &[f64]) -> Result<BitString, BdaError> {
        if query.len() != self.k {
            return Err(BdaError::DimensionMismatch {
                expected: self.k,
                got: query.len(),
            });
        }
        Ok(BitString::from_bools(
            (0..self.n())
                .map(|j| dot(self.weight_row(j), query) + self.biases[j] > 0.0)
                .collect(),
        ))
    }
}

/// Distinct codewords for each class id, in the order given.
pub fn assign_targets(
    class_ids: &[String],
    params: &CodeParams,
    seed: u64,
) -> Result<BTreeMap<String, Codeword>, BdaError> {
    let words = params.random_codewords(class_ids.len(), seed)?;
    Ok(class_ids.iter().cloned().zip(words).collect())
}

/// Trains toward `target` using only the class's own samples.
pub fn train_class(
    class_id: &str,
    samples: &[Vec<f64>],
    target: &BitString,
    hyper: Hyper,
) -> Result<ClassModel, BdaError> {
    train_with_background(class_id, samples, target, &[], hyper)
}

/// Trains toward `target` on the class's samples while background samples
/// are pulled toward their own labels. The background gives each bit's
/// hyperplane an orientation of its own, so inputs from outside the class
/// land on unrelated sides of the different bits.
pub fn train_with_background(
    class_id: &str,
    samples: &[Vec<f64>],
    target: &BitString,
    background: &[Labeled<'_>],
    hyper: Hyper,
) -> Result<ClassModel, BdaError> {
    let first = samples.first().ok_or(BdaError::NoSamples)?;
    if !(hyper.rate > 0.0 && hyper.rate.is_finite()) {
        return Err(BdaError::BadRate);
    }
    let k = first.len();
    let n = target.len();
    let genuine = samples.iter().map(|values| Labeled { values, target });
    let all: Vec<Labeled<'_>> = genuine.chain(background.iter().copied()).collect();
    for s in &all {
        if s.values.len() != k {
            return Err(BdaError::DimensionMismatch {
                expected: k,
                got: s.values.len(),
            });
        }
        if s.target.len() != n {
            return Err(BdaError::TargetLength {
                expected: n,
                got: s.target.len(),
            });
        }
    }

    let mut weights = vec![0.0; n * k];
    let mut biases = vec![0.0; n];
    let mut epochs_run = 0;
    let mut converged = false;
    while epochs_run < hyper.epochs {
        epochs_run += 1;
        let mut mistakes = 0usize;
        for s in &all {
            for j in 0..n {
                let w = &mut weights[j * k..(j + 1) * k];
                let fired = dot(w, s.values) + biases[j] > 0.0;
                let want = s.target.get(j);
                if fired != want {
                    let label = if want { hyper.rate } else { -hyper.rate };
                    w.iter_mut().zip(s.values).for_each(|(wi, x)| *wi += label * x);
                    biases[j] += label;
                    mistakes += 1;
                }
            }
        }
        if mistakes == 0 {
            converged = true;
            break;
        }
    }

    let mut model = ClassModel {
        class_id: class_id.to_string(),
        k,
        weights,
        biases,
        train_meta: TrainMeta {
            epochs_run,
            residual_bit_errors: 0,
            converged,
        },
    };
    let mut residual = 0;
    for s in samples {
        residual += hamming(&model.binarize(s)?, target)?;
    }
    if !converged {
        let background_clean = background.iter().try_fold(true, |ok, s| {
            Ok::<_, BdaError>(ok && model.binarize(s.values)? == *s.target)
        })?;
        model.train_meta.converged = residual == 0 && background_clean;
    }
    model.train_meta.residual_bit_errors = residual as u32;
    Ok(model)
}

/// `n - hamming(a, b)`: identical templates score `n`.
pub fn binary_match_score(a: &BitString, b: &BitString) -> Result<usize, BdaError> {
    Ok(a.len() - hamming(a, b)?)
}
