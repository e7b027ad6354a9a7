use serde::{Deserialize, Serialize};

use crate::pipeline::StageConfig;

use super::{EvalError, REPORT_SCHEMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rating {
    Low,
    Medium,
    High,
}

impl std::fmt::Display for Rating {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Rating::Low => "Low",
            Rating::Medium => "Medium",
            Rating::High => "High",
        })
    }
}

/// Template length `Kc` per stage; `None` where no length is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageKc {
    pub random_projection: Option<u64>,
    pub bda: Option<u64>,
    pub fuzzy_commitment: Option<u64>,
    pub full: Option<u64>,
}

pub const PRESETS: [&str; 1] = ["paper-novel"];

impl StageKc {
    pub fn preset(name: &str) -> Result<StageKc, EvalError> {
        match name {
            "paper-novel" => Ok(StageKc {
                random_projection: Some(3772),
                bda: None,
                fuzzy_commitment: Some(11340),
                full: Some(6800),
            }),
            other => Err(EvalError::UnknownPreset(other.to_string())),
        }
    }

    pub fn uniform(kc: u64) -> StageKc {
        StageKc {
            random_projection: Some(kc),
            bda: Some(kc),
            fuzzy_commitment: Some(kc),
            full: Some(kc),
        }
    }

    /// Lengths of this crate's own templates: `k` projected values, the
    /// `n_total`-bit binary template, the `n_total`-bit mask, and their sum
    /// for the full chain.
    pub fn from_config(config: &StageConfig) -> StageKc {
        let k = config.k as u64;
        let n = config.n_total() as u64;
        StageKc {
            random_projection: Some(k),
            bda: Some(n),
            fuzzy_commitment: Some(n),
            full: Some(k + 2 * n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityStage {
    pub stage: String,
    pub kc: Option<u64>,
    /// Guessing cost exponent: `2^(Kc-1)` operations.
    pub brute_force_bits: Option<u64>,
    pub brute_force: Rating,
    pub affine_transformation: Rating,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub schema_version: u32,
    pub source: String,
    pub stages: Vec<SecurityStage>,
    /// Entropy of the bound secret (`blocks * k_msg`), when known.
    pub secret_bits: Option<u64>,
}

pub fn brute_force_bits(kc: u64) -> Option<u64> {
    kc.checked_sub(1)
}

const STAGES: [(&str, Rating); 4] = [
    ("Random Projection", Rating::Low),
    ("BDA", Rating::High),
    ("Fuzzy Commitment", Rating::High),
    ("Full Algorithm", Rating::High),
];

pub fn security_report(
    kc: &StageKc,
    source: &str,
    secret_bits: Option<u64>,
) -> Result<SecurityReport, EvalError> {
    let lengths = [kc.random_projection, kc.bda, kc.fuzzy_commitment, kc.full];
    let stages = STAGES
        .iter()
        .zip(lengths)
        .map(|((stage, affine), kc)| {
            let brute_force_bits = match kc {
                Some(kc) => Some(brute_force_bits(kc).ok_or(EvalError::ZeroKc { stage })?),
                None => None,
            };
            Ok(SecurityStage {
                stage: stage.to_string(),
                kc,
                brute_force_bits,
                brute_force: Rating::High,
                affine_transformation: *affine,
            })
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(SecurityReport {
        schema_version: REPORT_SCHEMA,
        source: source.to_string(),
        stages,
        secret_bits,
    })
}

impl SecurityReport {
    pub fn to_text(&self) -> String {
        let dash = || "-".to_string();
        let mut rows: Vec<Vec<String>> = vec![std::iter::once("Attack".to_string())
            .chain(self.stages.iter().map(|s| s.stage.clone()))
            .collect()];
        let mut row = |label: &str, f: &dyn Fn(&SecurityStage) -> String| {
            rows.push(
                std::iter::once(label.to_string())
                    .chain(self.stages.iter().map(f))
                    .collect(),
            );
        };
        row("Kc", &|s| s.kc.map_or_else(dash, |k| k.to_string()));
        row("Brute Force Cost", &|s| {
            s.brute_force_bits.map_or_else(dash, |b| format!("2^{b}"))
        });
        row("Brute Force", &|s| s.brute_force.to_string());
        row("Affine Transformation", &|s| s.affine_transformation.to_string());
        let cols = rows[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = format!("Security strength ({})\n", self.source);
        for r in &rows {
            let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        if let Some(bits) = self.secret_bits {
            out.push_str(&format!("Bound secret entropy: {bits} bits\n"));
        }
        out
    }
}
