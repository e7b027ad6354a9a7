//! Seeded random projection onto orthonormal rows.
//!
//! The matrix is built in three steps: fill a `k x d` matrix with i.i.d.
//! standard-normal entries from the seeded stream (row-major), orthogonalize the
//! rows with modified Gram-Schmidt, and scale every row to unit length. Only the
//! seed and the dimensions are ever persisted; the matrix is regenerated on
//! demand and is bit-identical across builds.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::rng::seeded;
use crate::vectors::{dot, norm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectionError {
    #[error("output dimension {k} exceeds input dimension {d}")]
    OutputTooLarge { d: usize, k: usize },
    #[error("projection dimensions must be positive (d={d}, k={k})")]
    ZeroDimension { d: usize, k: usize },
    #[error("input has dimension {got}, key expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A residual shorter than this after orthogonalization means the draw was
/// (numerically) dependent on earlier rows; the row is redrawn.
const DEGENERATE_RESIDUAL: f64 = 1e-12;
/// Off-diagonal Gram entries above this trigger one re-orthogonalization pass.
const ORTHO_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionKey {
    seed: u64,
    d: usize,
    k: usize,
    /// Row-major `k x d`.
    rows: Vec<f64>,
}

/// Projected template; the seed identifies the key that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTemplate {
    pub values: Vec<f64>,
    pub key_seed: u64,
}

impl ProjectionKey {
    pub fn generate(seed: u64, d: usize, k: usize) -> Result<Self, ProjectionError> {
        if d == 0 || k == 0 {
            return Err(ProjectionError::ZeroDimension { d, k });
        }
        if k > d {
            return Err(ProjectionError::OutputTooLarge { d, k });
        }
        let mut rng = seeded(seed);
        let mut rows = vec![0.0; k * d];
        for i in 0..k {
            fill_gaussian(&mut rng, &mut rows[i * d..(i + 1) * d]);
        }
        for i in 0..k {
            loop {
                let (done, rest) = rows.split_at_mut(i * d);
                let row = &mut rest[..d];
                orthogonalize_against(row, done, d);
                let len = norm(row);
                if len >= DEGENERATE_RESIDUAL {
                    row.iter_mut().for_each(|x| *x /= len);
                    break;
                }
                fill_gaussian(&mut rng, row);
            }
        }
        let mut key = ProjectionKey { seed, d, k, rows };
        if key.max_gram_deviation() > ORTHO_TOLERANCE {
            key.reorthogonalize();
        }
        Ok(key)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn output_dim(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    /// `rows · v`.
    pub fn project(&self, v: &[f64]) -> Result<RealTemplate, ProjectionError> {
        if v.len() != self.d {
            return Err(ProjectionError::DimensionMismatch {
                expected: self.d,
                got: v.len(),
            });
        }
        Ok(RealTemplate {
            values: (0..self.k).map(|i| dot(self.row(i), v)).collect(),
            key_seed: self.seed,
        })
    }

    /// `sqrt(d / k)`: multiplying projected distances by this gives unbiased
    /// estimates of the original distances (orthonormal rows shrink them).
    pub fn distance_scale(&self) -> f64 {
        (self.d as f64 / self.k as f64).sqrt()
    }

    /// `max |rows · rowsᵀ − I|` over all entries.
    pub fn max_gram_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.k {
            for j in i..self.k {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(self.row(i), self.row(j)) - target).abs());
            }
        }
        worst
    }

    fn reorthogonalize(&mut self) {
        let d = self.d;
        for i in 0..self.k {
            let (done, rest) = self.rows.split_at_mut(i * d);
            let row = &mut rest[..d];
            orthogonalize_against(row, done, d);
            let len = norm(row);
            row.iter_mut().for_each(|x| *x /= len);
        }
    }
}

fn fill_gaussian(rng: &mut ChaCha20Rng, row: &mut [f64]) {
    row.iter_mut()
        .for_each(|x| *x = rng.sample::<f64, _>(StandardNormal));
}

/// Modified Gram-Schmidt: subtract the projection onto each finished
/// (unit-length) row in turn, using the running residual.
fn orthogonalize_against(row: &mut [f64], done: &[f64], d: usize) {
    for q in done.chunks_exact(d) {
        let c = dot(row, q);
        row.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
    }
}
