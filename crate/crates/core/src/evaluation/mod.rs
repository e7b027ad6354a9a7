//! Desk-scale evaluation: enrolled benchmarks, genuine/imposter histograms,
//! per-stage score tables, timing and security reports.

mod histogram;
mod scores;
mod security;
mod timing;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bda::binary_match_score;
use crate::bits::BitString;
use crate::pipeline::{
    enroll_with_target, verify_record, EnrollOptions, EnrollSeeds, Enrollment, PipelineError, StageConfig,
    TargetRegistry,
};
use crate::rng::seeded;
use crate::vectors::{centroid, synth_classes, FeatureVector, SynthSpec, VectorError};

pub use histogram::{genuine_imposter_histograms, random_pair_scores, Histograms};
pub use scores::{stage_score_table, ScoreRow, ScoreSummary, ScoreTable, TABLE_HEADERS};
pub use security::{
    brute_force_bits, security_report, Rating, SecurityReport, SecurityStage, StageKc, PRESETS,
};
pub use timing::{timing_report, StageTiming, TimingReport};

/// Version stamped into every JSON report.
pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Vectors(#[from] VectorError),
    #[error("degenerate dataset: {0}")]
    Degenerate(String),
    #[error("no probes to score")]
    NoProbes,
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("{stage}: Kc must be at least 1")]
    ZeroKc { stage: &'static str },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
}

/// One enrolled class of a benchmark.
#[derive(Debug, Clone)]
pub struct EnrolledClass {
    pub label: String,
    pub enrollment: Enrollment,
    /// Centroid of the raw enrollment vectors.
    pub reference: Vec<f64>,
    pub enrolled: Vec<FeatureVector>,
    pub probes: Vec<FeatureVector>,
}

/// Every class of a dataset enrolled from its first samples; the rest are
/// held out as probes.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub config: StageConfig,
    pub classes: Vec<EnrolledClass>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub genuine_trials: usize,
    pub genuine_accepts: usize,
    pub imposter_trials: usize,
    pub imposter_accepts: usize,
    pub genuine_accept_rate: f64,
    pub imposter_accept_rate: f64,
}

fn group_by_label(dataset: &[FeatureVector]) -> Vec<(String, Vec<FeatureVector>)> {
    let mut groups: Vec<(String, Vec<FeatureVector>)> = Vec::new();
    for v in dataset {
        match groups.iter_mut().find(|(l, _)| *l == v.label) {
            Some((_, g)) => g.push(v.clone()),
            None => groups.push((v.label.clone(), vec![v.clone()])),
        }
    }
    groups
}

fn rate(hits: usize, trials: usize) -> f64 {
    if trials == 0 {
        0.0
    } else {
        hits as f64 / trials as f64
    }
}

impl Benchmark {
    /// Enrolls each class (in order of first appearance) on its first
    /// `enroll_per_class` samples. Class `i` is bound to registry slot `i`;
    /// all seeds derive from `seed`.
    pub fn build(
        dataset: &[FeatureVector],
        config: &StageConfig,
        enroll_per_class: usize,
        seed: u64,
    ) -> Result<Benchmark, EvalError> {
        if enroll_per_class == 0 {
            return Err(EvalError::Degenerate(
                "enroll_per_class must be at least 1".into(),
            ));
        }
        let groups = group_by_label(dataset);
        if groups.is_empty() {
            return Err(EvalError::Degenerate("no samples".into()));
        }
        let code = config.validate()?;
        let mut stream = seeded(seed);
        let registry = TargetRegistry::new(stream.next_u64());
        let options = EnrollOptions {
            created_at: Some(0),
            ..Default::default()
        };
        let mut classes = Vec::with_capacity(groups.len());
        for (slot, (label, samples)) in groups.into_iter().enumerate() {
            let split = enroll_per_class.min(samples.len());
            let (enrolled, probes) = samples.split_at(split);
            let target = registry.target_at(&code, config.blocks, slot as u64)?;
            let seeds = EnrollSeeds::from_base(stream.next_u64());
            let enrollment = enroll_with_target(&label, enrolled, config, seeds, &target, &options)?;
            for w in &enrollment.warnings {
                log::warn!("{w}");
            }
            let reference = centroid(enrolled.iter().map(|v| v.values.as_slice()));
            classes.push(EnrolledClass {
                label,
                enrollment,
                reference,
                enrolled: enrolled.to_vec(),
                probes: probes.to_vec(),
            });
        }
        Ok(Benchmark {
            config: *config,
            classes,
        })
    }

    pub fn class(&self, label: &str) -> Option<&EnrolledClass> {
        self.classes.iter().find(|c| c.label == label)
    }

    /// Genuine trials: each class's probes against its own record. Imposter
    /// trials: each probe against every other class's record.
    pub fn rates(&self) -> Result<Rates, EvalError> {
        let (mut gt, mut ga, mut it, mut ia) = (0, 0, 0, 0);
        for owner in &self.classes {
            for probing in &self.classes {
                for p in &probing.probes {
                    let accepted = verify_record(&owner.enrollment.record, &p.values)?.accepted;
                    if owner.label == probing.label {
                        gt += 1;
                        ga += accepted as usize;
                    } else {
                        it += 1;
                        ia += accepted as usize;
                    }
                }
            }
        }
        Ok(Rates {
            genuine_trials: gt,
            genuine_accepts: ga,
            imposter_trials: it,
            imposter_accepts: ia,
            genuine_accept_rate: rate(ga, gt),
            imposter_accept_rate: rate(ia, it),
        })
    }

    /// Binary match score of `query` against the class's committed template.
    pub fn binary_score(&self, class: &EnrolledClass, query: &[f64]) -> Result<usize, EvalError> {
        let bits: BitString = crate::pipeline::binarize_query(&class.enrollment.record, query)?;
        Ok(binary_match_score(&bits, &class.enrollment.template).map_err(PipelineError::from)?)
    }
}

/// Deterministic part of a synthetic benchmark run (timings are reported
/// separately).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub synth: SynthSpec,
    pub config: StageConfig,
    pub enroll_per_class: usize,
    pub seed: u64,
    pub rates: Rates,
    pub scores: ScoreTable,
}

pub struct BenchRun {
    pub report: BenchReport,
    pub histograms: Histograms,
}

/// Generates the dataset, enrolls every class on its first
/// `enroll_per_class` samples and scores the held-out probes.
pub fn run_bench(
    synth: &SynthSpec,
    config: &StageConfig,
    enroll_per_class: usize,
    seed: u64,
) -> Result<BenchRun, EvalError> {
    let dataset = synth_classes(synth)?;
    let bench = Benchmark::build(&dataset, config, enroll_per_class, seed)?;
    Ok(BenchRun {
        report: BenchReport {
            schema_version: REPORT_SCHEMA,
            synth: *synth,
            config: *config,
            enroll_per_class,
            seed,
            rates: bench.rates()?,
            scores: stage_score_table(&bench)?,
        },
        histograms: bench.histograms()?,
    })
}
