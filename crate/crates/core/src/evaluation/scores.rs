use serde::{Deserialize, Serialize};

use crate::pipeline::{verify_record, PipelineError};
use crate::randproj::ProjectionKey;
use crate::vectors::real_match_score;

use super::{Benchmark, EvalError, REPORT_SCHEMA};

/// Column headers of the rendered score table.
pub const TABLE_HEADERS: [&str; 5] = [
    "Images",
    "Feature Vector",
    "Cancelable Template",
    "Binary Template Using BDA",
    "Novel Algorithm",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub probe_id: String,
    /// Raw features against the class reference, in `[0, score_scale]`.
    pub feature_score: u32,
    /// Projected features against the projected reference, in `[0, score_scale]`.
    pub cancelable_score: u32,
    /// Binarized probe against the committed template, in `[0, n_total]`.
    pub binary_score: usize,
    pub accepted: bool,
    /// `n_total` minus the bits corrected while decoding; `None` on reject.
    pub novel_score: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub feature_mean: f64,
    pub cancelable_mean: f64,
    pub binary_mean: f64,
    pub accept_rate: f64,
    pub binary_exceeds_cancelable: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub schema_version: u32,
    pub score_scale: u32,
    pub n_total: usize,
    pub rows: Vec<ScoreRow>,
    /// Stage means normalized to `[0, 1]` (real scores by `score_scale`,
    /// binary scores by `n_total`).
    pub summary: ScoreSummary,
}

impl ScoreTable {
    pub fn new(score_scale: u32, n_total: usize, rows: Vec<ScoreRow>) -> Result<ScoreTable, EvalError> {
        if rows.is_empty() {
            return Err(EvalError::NoProbes);
        }
        let count = rows.len() as f64;
        let avg = |f: &dyn Fn(&ScoreRow) -> f64| rows.iter().map(f).sum::<f64>() / count;
        let scale = f64::from(score_scale);
        let feature_mean = avg(&|r| f64::from(r.feature_score) / scale);
        let cancelable_mean = avg(&|r| f64::from(r.cancelable_score) / scale);
        let binary_mean = avg(&|r| r.binary_score as f64 / n_total as f64);
        let accept_rate = avg(&|r| r.accepted as u8 as f64);
        let binary_exceeds_cancelable = binary_mean > cancelable_mean;
        let verdict = if binary_exceeds_cancelable {
            "binary template scores above cancelable template"
        } else {
            "binary template does not score above cancelable template"
        };
        Ok(ScoreTable {
            schema_version: REPORT_SCHEMA,
            score_scale,
            n_total,
            rows,
            summary: ScoreSummary {
                feature_mean,
                cancelable_mean,
                binary_mean,
                accept_rate,
                binary_exceeds_cancelable,
                verdict: verdict.to_string(),
            },
        })
    }

    /// Aligned columns: header, one line per probe, then normalized means.
    pub fn to_text(&self) -> String {
        let mut cells: Vec<[String; 5]> = vec![TABLE_HEADERS.map(String::from)];
        for r in &self.rows {
            cells.push([
                r.probe_id.clone(),
                r.feature_score.to_string(),
                r.cancelable_score.to_string(),
                r.binary_score.to_string(),
                r.novel_score
                    .map_or_else(|| "REJECT".to_string(), |s| s.to_string()),
            ]);
        }
        let s = &self.summary;
        cells.push([
            "Mean (normalized)".to_string(),
            format!("{:.3}", s.feature_mean),
            format!("{:.3}", s.cancelable_mean),
            format!("{:.3}", s.binary_mean),
            format!("{:.3}", s.accept_rate),
        ]);
        let mut widths = [0usize; 5];
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        for row in &cells {
            let line: Vec<String> = row.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out.push_str(&s.verdict);
        out.push('\n');
        out
    }
}

/// One row per held-out genuine probe of every class.
pub fn stage_score_table(bench: &Benchmark) -> Result<ScoreTable, EvalError> {
    let scale = bench.config.score_scale;
    let n_total = bench.config.n_total();
    let mut rows = Vec::new();
    for class in &bench.classes {
        let record = &class.enrollment.record;
        let key = ProjectionKey::generate(record.projection_seed, record.config.d, record.config.k)
            .map_err(PipelineError::from)?;
        let reference = key.project(&class.reference).map_err(PipelineError::from)?;
        for (i, probe) in class.probes.iter().enumerate() {
            let projected = key.project(&probe.values).map_err(PipelineError::from)?;
            let verification = verify_record(record, &probe.values)?;
            let novel_score = verification.accepted.then(|| {
                n_total
                    - verification
                        .errors_corrected()
                        .into_iter()
                        .flatten()
                        .sum::<usize>()
            });
            rows.push(ScoreRow {
                probe_id: format!("{}/{}", class.label, class.enrolled.len() + i),
                feature_score: real_match_score(&probe.values, &class.reference, scale)?,
                cancelable_score: real_match_score(&projected.values, &reference.values, scale)?,
                binary_score: bench.binary_score(class, &probe.values)?,
                accepted: verification.accepted,
                novel_score,
            });
        }
    }
    ScoreTable::new(scale, n_total, rows)
}
