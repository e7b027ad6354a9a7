use serde::{Deserialize, Serialize};

use crate::bch::{build_code, CodeParams, CodeSpec};
use crate::bda::Hyper;

use super::PipelineError;

/// Background pseudo-classes synthesized at enrollment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortConfig {
    pub classes: usize,
    pub samples_per_class: usize,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            classes: 16,
            samples_per_class: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AcceptPolicy {
    /// Every block commitment must accept.
    #[default]
    AllBlocks,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StageConfig {
    /// Feature dimension.
    pub d: usize,
    /// Projected dimension.
    pub k: usize,
    pub code: CodeSpec,
    /// Concatenated code blocks; the binary template has `blocks * n` bits.
    pub blocks: usize,
    pub perceptron: Hyper,
    pub score_scale: u32,
    pub cohort: CohortConfig,
    pub policy: AcceptPolicy,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            d: 128,
            k: 32,
            code: CodeSpec { m: 6, t: 5 },
            blocks: 1,
            perceptron: Hyper::default(),
            score_scale: 256,
            cohort: CohortConfig::default(),
            policy: AcceptPolicy::AllBlocks,
        }
    }
}

impl StageConfig {
    pub fn n_total(&self) -> usize {
        self.blocks * self.code.n()
    }

    /// Checks the invariants and builds the block code.
    pub fn validate(&self) -> Result<CodeParams, PipelineError> {
        let bad = |msg: String| Err(PipelineError::Config(msg));
        if self.d == 0 || self.k == 0 || self.k > self.d {
            return bad(format!("need 1 <= k <= d, got d={} k={}", self.d, self.k));
        }
        if self.blocks == 0 || self.blocks > u16::MAX as usize {
            return bad(format!("blocks must be in 1..=65535, got {}", self.blocks));
        }
        if !(self.perceptron.rate > 0.0 && self.perceptron.rate.is_finite()) {
            return bad("perceptron rate must be positive".into());
        }
        if self.score_scale == 0 {
            return bad("score_scale must be positive".into());
        }
        Ok(build_code(self.code.m, self.code.t)?)
    }
}
