//! Enrollment and verification.
//!
//! Enrollment: regenerate the projection from its seed, project the training
//! vectors, train per-bit discriminants toward the user's target (with a
//! synthetic background cohort), binarize the training centroid and commit to
//! it block by block. Verification repeats projection and binarization on the
//! query and checks every block commitment.

mod cohort;
mod config;
mod record;
mod registry;
mod store;

use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cohort::{within_spread, Population};
pub use config::{AcceptPolicy, CohortConfig, StageConfig};
pub use record::{deserialize_record, serialize_record, RecordError, TemplateRecord, MAGIC, VERSION};
pub use registry::TargetRegistry;
pub use store::{StagedWrite, Store};

use crate::bch::{CodeError, CodeParams};
use crate::bda::{train_with_background, BdaError, Labeled};
use crate::bits::{hamming, BitString};
use crate::commitment::{commit, CommitmentError, Decision};
use crate::randproj::{ProjectionError, ProjectionKey};
use crate::rng::seeded;
use crate::vectors::{centroid, FeatureVector};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("user {0:?} is already enrolled")]
    Duplicate(String),
    #[error("user {0:?} is not enrolled")]
    UnknownUser(String),
    #[error("target registry exhausted: all {capacity} targets assigned")]
    RegistryFull { capacity: u64 },
    #[error("no training vectors")]
    NoTraining,
    #[error("training vectors carry different labels ({0:?} and {1:?})")]
    MixedLabels(String, String),
    #[error("vector has dimension {got}, configuration expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("population model has dimension {got}, configuration expects {expected}")]
    PopulationDimension { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Bda(#[from] BdaError),
    #[error(transparent)]
    Commitment(#[from] CommitmentError),
    #[error("record {path}: {source}")]
    Record {
        path: String,
        #[source]
        source: RecordError,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("store index {path}: {source}")]
    Index {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl PipelineError {
    /// Errors about enrollment state rather than malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            PipelineError::Duplicate(_) | PipelineError::UnknownUser(_) | PipelineError::RegistryFull { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnrollSeeds {
    pub projection: u64,
    /// Drives the background cohort (its targets and samples).
    pub targets: u64,
    pub commitment: u64,
}

impl EnrollSeeds {
    /// Three seeds derived from one: `base`, `base + 1`, `base + 2`.
    pub fn from_base(base: u64) -> Self {
        EnrollSeeds {
            projection: base,
            targets: base.wrapping_add(1),
            commitment: base.wrapping_add(2),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EnrollOptions {
    pub overwrite: bool,
    /// Background population model; defaults to an isotropic model scaled to
    /// the user's own centroid.
    pub population: Option<Population>,
    /// Unix milliseconds; defaults to the wall clock.
    pub created_at: Option<i64>,
}

/// Wall-clock duration of each named stage, plus the enclosing total.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timings {
    pub stages: Vec<(&'static str, Duration)>,
    pub total: Duration,
}

impl Timings {
    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push((stage, start.elapsed()));
        out
    }

    pub fn stage_sum(&self) -> Duration {
        self.stages.iter().map(|(_, d)| *d).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Enrollment {
    pub record: TemplateRecord,
    /// The committed binary template. Never persisted; kept for evaluation.
    pub template: BitString,
    pub target: BitString,
    pub warnings: Vec<String>,
    pub timings: Timings,
}

#[derive(Debug, Clone)]
pub struct Verification {
    pub accepted: bool,
    pub blocks: Vec<Decision>,
    pub binary: BitString,
    pub timings: Timings,
}

impl Verification {
    pub fn errors_corrected(&self) -> Vec<Option<usize>> {
        self.blocks
            .iter()
            .map(|d| match d {
                Decision::Accept { errors_corrected } => Some(*errors_corrected),
                Decision::Reject => None,
            })
            .collect()
    }
}

fn now_millis() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as i64)
        .unwrap_or(0)
}

fn check_training(training: &[FeatureVector], d: usize) -> Result<(), PipelineError> {
    let first = training.first().ok_or(PipelineError::NoTraining)?;
    for v in training {
        if v.label != first.label {
            return Err(PipelineError::MixedLabels(first.label.clone(), v.label.clone()));
        }
        if v.dim() != d {
            return Err(PipelineError::DimensionMismatch {
                expected: d,
                got: v.dim(),
            });
        }
    }
    Ok(())
}

/// Builds a record for `user_id` bound to `target` (`blocks * n` bits, one
/// codeword per block).
pub fn enroll_with_target(
    user_id: &str,
    training: &[FeatureVector],
    config: &StageConfig,
    seeds: EnrollSeeds,
    target: &BitString,
    options: &EnrollOptions,
) -> Result<Enrollment, PipelineError> {
    let code = config.validate()?;
    check_training(training, config.d)?;
    if target.len() != config.n_total() {
        return Err(PipelineError::Config(format!(
            "target has {} bits, configuration needs {}",
            target.len(),
            config.n_total()
        )));
    }
    if let Some(p) = &options.population {
        if p.dim() != config.d {
            return Err(PipelineError::PopulationDimension {
                expected: config.d,
                got: p.dim(),
            });
        }
    }
    let started = Instant::now();
    let mut timings = Timings::default();

    let key = timings.time("generate_projection", || {
        ProjectionKey::generate(seeds.projection, config.d, config.k)
    })?;
    let projected = timings.time("project", || {
        training
            .iter()
            .map(|v| key.project(&v.values).map(|t| t.values))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let background = timings.time("background", || {
        let raw: Vec<&[f64]> = training.iter().map(|v| v.values.as_slice()).collect();
        let population = options
            .population
            .clone()
            .unwrap_or_else(|| Population::isotropic_around(&centroid(raw.iter().copied())));
        let bg = cohort::synthesize(
            &population,
            within_spread(&raw),
            config.cohort,
            &code,
            config.blocks,
            target,
            seeds.targets,
        );
        let projected_bg = bg
            .samples
            .iter()
            .map(|(x, g)| key.project(x).map(|t| (t.values, *g)))
            .collect::<Result<Vec<_>, _>>();
        projected_bg.map(|p| (p, bg.targets))
    })?;
    let (bg_samples, bg_targets) = background;

    let model = timings.time("train", || {
        let labeled: Vec<Labeled<'_>> = bg_samples
            .iter()
            .map(|(v, g)| Labeled {
                values: v,
                target: &bg_targets[*g],
            })
            .collect();
        train_with_background(user_id, &projected, target, &labeled, config.perceptron)
    })?;

    let template = timings.time("binarize", || {
        model.binarize(&centroid(projected.iter().map(Vec::as_slice)))
    })?;

    let commitments = timings.time("commit", || {
        let mut rng = seeded(seeds.commitment);
        template
            .chunks(code.n())
            .iter()
            .map(|block| commit(block, &code, &mut rng))
            .collect::<Result<Vec<_>, _>>()
    })?;
    timings.total = started.elapsed();

    let mut warnings = Vec::new();
    let meta = model.train_meta;
    if !meta.converged {
        warnings.push(format!(
            "training for {user_id:?} did not converge after {} epochs ({} residual bit errors on training samples)",
            meta.epochs_run, meta.residual_bit_errors
        ));
    }
    let drift = hamming(&template, target).map_err(CommitmentError::from)?;
    if drift > 0 {
        warnings.push(format!(
            "committed template for {user_id:?} differs from its target in {drift} bits"
        ));
    }

    Ok(Enrollment {
        record: TemplateRecord {
            user_id: user_id.to_string(),
            version: VERSION,
            config: *config,
            projection_seed: seeds.projection,
            model,
            commitments,
            created_at: options.created_at.unwrap_or_else(now_millis),
        },
        template,
        target: target.clone(),
        warnings,
        timings,
    })
}

/// Projection and binarization of `query` under a record, without the
/// commitment check.
pub fn binarize_query(record: &TemplateRecord, query: &[f64]) -> Result<BitString, PipelineError> {
    let key = ProjectionKey::generate(record.projection_seed, record.config.d, record.config.k)?;
    let projected = key.project(query)?;
    Ok(record.model.binarize(&projected.values)?)
}

pub fn verify_record(record: &TemplateRecord, query: &[f64]) -> Result<Verification, PipelineError> {
    let config = &record.config;
    if query.len() != config.d {
        return Err(PipelineError::DimensionMismatch {
            expected: config.d,
            got: query.len(),
        });
    }
    let code: CodeParams = config.validate()?;
    let started = Instant::now();
    let mut timings = Timings::default();
    let key = timings.time("regenerate_projection", || {
        ProjectionKey::generate(record.projection_seed, config.d, config.k)
    })?;
    let projected = timings.time("project", || key.project(query))?;
    let binary = timings.time("binarize", || record.model.binarize(&projected.values))?;
    let blocks = timings.time("commitment", || {
        binary
            .chunks(code.n())
            .iter()
            .zip(&record.commitments)
            .map(|(b, c)| c.verify(&code, b))
            .collect::<Result<Vec<_>, _>>()
    })?;
    timings.total = started.elapsed();
    let accepted = match config.policy {
        AcceptPolicy::AllBlocks => blocks.iter().all(Decision::is_accept),
    };
    Ok(Verification {
        accepted,
        blocks,
        binary,
        timings,
    })
}
