use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::pipeline::{
    enroll_with_target, verify_record, EnrollOptions, EnrollSeeds, StageConfig, TargetRegistry, Timings,
};
use crate::vectors::FeatureVector;

use super::{group_by_label, EvalError, REPORT_SCHEMA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub samples_us: Vec<f64>,
    pub median_us: f64,
    /// Max minus min; `None` with a single repetition.
    pub spread_us: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub schema_version: u32,
    pub repetitions: usize,
    pub enroll_samples: usize,
    pub enroll: Vec<StageTiming>,
    pub enroll_total: StageTiming,
    pub verify: Vec<StageTiming>,
    pub verify_total: StageTiming,
    /// Largest `|total - sum(stages)| / total` over verification runs.
    pub verify_unaccounted: f64,
}

fn micros(d: Duration) -> f64 {
    d.as_secs_f64() * 1e6
}

fn summarize(stage: &str, samples: Vec<f64>) -> StageTiming {
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median_us = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    };
    let spread_us = (sorted.len() > 1).then(|| sorted[sorted.len() - 1] - sorted[0]);
    StageTiming {
        stage: stage.to_string(),
        samples_us: samples,
        median_us,
        spread_us,
    }
}

fn per_stage(runs: &[Timings]) -> (Vec<StageTiming>, StageTiming) {
    let names: Vec<&str> = runs[0].stages.iter().map(|(n, _)| *n).collect();
    let stages = names
        .iter()
        .enumerate()
        .map(|(i, name)| summarize(name, runs.iter().map(|t| micros(t.stages[i].1)).collect()))
        .collect();
    let total = summarize("total", runs.iter().map(|t| micros(t.total)).collect());
    (stages, total)
}

/// Times enrollment of the first class on all but its last sample, and
/// verification of that last sample (the only sample, for a singleton class).
pub fn timing_report(
    dataset: &[FeatureVector],
    config: &StageConfig,
    repetitions: usize,
    seed: u64,
) -> Result<TimingReport, EvalError> {
    if repetitions == 0 {
        return Err(EvalError::NoRepetitions);
    }
    let (label, samples) = group_by_label(dataset)
        .into_iter()
        .next()
        .ok_or_else(|| EvalError::Degenerate("no samples".into()))?;
    let train = &samples[..samples.len().saturating_sub(1).max(1)];
    let query = &samples[samples.len() - 1].values;
    let code = config.validate()?;
    let target = TargetRegistry::new(seed).target_at(&code, config.blocks, 0)?;
    let options = EnrollOptions {
        created_at: Some(0),
        ..Default::default()
    };
    let mut enroll_runs = Vec::with_capacity(repetitions);
    let mut verify_runs = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let e = enroll_with_target(
            &label,
            train,
            config,
            EnrollSeeds::from_base(seed),
            &target,
            &options,
        )?;
        verify_runs.push(verify_record(&e.record, query)?.timings);
        enroll_runs.push(e.timings);
    }
    let verify_unaccounted = verify_runs
        .iter()
        .map(|t| {
            let total = t.total.as_secs_f64();
            if total == 0.0 {
                0.0
            } else {
                (total - t.stage_sum().as_secs_f64()).abs() / total
            }
        })
        .fold(0.0, f64::max);
    let (enroll, enroll_total) = per_stage(&enroll_runs);
    let (verify, verify_total) = per_stage(&verify_runs);
    Ok(TimingReport {
        schema_version: REPORT_SCHEMA,
        repetitions,
        enroll_samples: train.len(),
        enroll,
        enroll_total,
        verify,
        verify_total,
        verify_unaccounted,
    })
}

impl TimingReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} repetitions, enrollment on {} samples (microseconds)\n",
            self.repetitions, self.enroll_samples
        );
        let mut section = |title: &str, stages: &[StageTiming], total: &StageTiming| {
            out.push_str(&format!("{title}\n"));
            for s in stages.iter().chain(std::iter::once(total)) {
                let spread = s
                    .spread_us
                    .map_or_else(|| "n/a".to_string(), |v| format!("{v:.1}"));
                out.push_str(&format!(
                    "  {:<22} median {:>12.1}  spread {:>10}\n",
                    s.stage, s.median_us, spread
                ));
            }
        };
        section("enroll", &self.enroll, &self.enroll_total);
        section("verify", &self.verify, &self.verify_total);
        out
    }
}
