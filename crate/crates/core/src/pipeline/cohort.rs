//! Background population for enrollment.
//!
//! Enrollment trains each output bit against synthetic pseudo-classes drawn
//! from a population model, each labeled with its own random target. Without
//! them every bit of a one-class model shares the same orientation and inputs
//! from other people binarize close to the target.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bch::CodeParams;
use crate::bits::BitString;
use crate::rng::seeded;
use crate::vectors::{centroid, FeatureVector};

use super::config::CohortConfig;

/// Per-coordinate Gaussian model of the feature population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Population {
    /// Coordinate-wise mean and standard deviation of a background sample.
    pub fn fit(vectors: &[FeatureVector]) -> Option<Population> {
        let first = vectors.first()?;
        let mean = centroid(vectors.iter().map(|v| v.values.as_slice()));
        let mut var = vec![0.0; first.dim()];
        for v in vectors {
            for ((s, x), m) in var.iter_mut().zip(&v.values).zip(&mean) {
                *s += (x - m).powi(2);
            }
        }
        let denom = (vectors.len().max(2) - 1) as f64;
        let std = var.iter().map(|s| (s / denom).sqrt()).collect();
        Some(Population { mean, std })
    }

    /// Zero-mean isotropic model whose spread matches the RMS coordinate of
    /// `center`; the fallback when no background sample is supplied.
    pub fn isotropic_around(center: &[f64]) -> Population {
        let rms = (center.iter().map(|x| x * x).sum::<f64>() / center.len() as f64).sqrt();
        Population {
            mean: vec![0.0; center.len()],
            std: vec![rms; center.len()],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Pooled per-coordinate standard deviation of samples around their mean;
/// zero for a single sample.
pub fn within_spread(samples: &[&[f64]]) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let mean = centroid(samples.iter().copied());
    let ss: f64 = samples
        .iter()
        .flat_map(|s| s.iter().zip(&mean).map(|(x, m)| (x - m).powi(2)))
        .sum();
    (ss / ((samples.len() - 1) * mean.len()) as f64).sqrt()
}

/// Concatenation of `blocks` codewords of independently drawn messages.
pub fn random_target<R: Rng + ?Sized>(code: &CodeParams, blocks: usize, rng: &mut R) -> BitString {
    let parts: Vec<BitString> = (0..blocks)
        .map(|_| {
            let msg = BitString::random(rng, code.k_msg());
            code.encode(&msg)
                .expect("message length matches code")
                .into_bits()
        })
        .collect();
    BitString::concat(&parts)
}

pub struct Background {
    /// Feature-space samples with the index of their pseudo-class.
    pub samples: Vec<(Vec<f64>, usize)>,
    pub targets: Vec<BitString>,
}

/// Seeded pseudo-classes: targets first (distinct from each other and from
/// `exclude`), then centers and samples, all from one stream.
pub fn synthesize(
    population: &Population,
    within_sd: f64,
    cfg: CohortConfig,
    code: &CodeParams,
    blocks: usize,
    exclude: &BitString,
    seed: u64,
) -> Background {
    let mut rng = seeded(seed);
    let bits = code.k_msg() * blocks;
    let available = if bits < 63 {
        (1usize << bits) - 1
    } else {
        usize::MAX
    };
    let classes = cfg.classes.min(available);
    let mut targets: Vec<BitString> = Vec::with_capacity(classes);
    while targets.len() < classes {
        let t = random_target(code, blocks, &mut rng);
        if &t != exclude && !targets.contains(&t) {
            targets.push(t);
        }
    }
    let mut samples = Vec::with_capacity(classes * cfg.samples_per_class);
    for g in 0..classes {
        let center: Vec<f64> = population
            .mean
            .iter()
            .zip(&population.std)
            .map(|(m, s)| m + s * rng.sample::<f64, _>(StandardNormal))
            .collect();
        for _ in 0..cfg.samples_per_class {
            let x = center
                .iter()
                .map(|c| c + within_sd * rng.sample::<f64, _>(StandardNormal))
                .collect();
            samples.push((x, g));
        }
    }
    Background { samples, targets }
}
