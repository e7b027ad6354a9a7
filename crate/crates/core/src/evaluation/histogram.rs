use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::pipeline::{binarize_query, StageConfig};
use crate::rng::seeded;
use crate::vectors::FeatureVector;

use super::{Benchmark, EvalError, REPORT_SCHEMA};

/// Counts of binary match scores, one bin per integer score in `0..=n_total`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histograms {
    pub schema_version: u32,
    pub n_total: usize,
    pub genuine: Vec<u64>,
    pub imposter: Vec<u64>,
}

fn mean(bins: &[u64]) -> Option<f64> {
    let total: u64 = bins.iter().sum();
    (total > 0).then(|| {
        bins.iter()
            .enumerate()
            .map(|(s, c)| s as f64 * *c as f64)
            .sum::<f64>()
            / total as f64
    })
}

fn mode(bins: &[u64]) -> Option<usize> {
    let best = bins
        .iter()
        .enumerate()
        .max_by_key(|(s, c)| (**c, std::cmp::Reverse(*s)))?;
    (*best.1 > 0).then_some(best.0)
}

impl Histograms {
    pub fn genuine_pairs(&self) -> u64 {
        self.genuine.iter().sum()
    }

    pub fn imposter_pairs(&self) -> u64 {
        self.imposter.iter().sum()
    }

    pub fn genuine_mean(&self) -> Option<f64> {
        mean(&self.genuine)
    }

    pub fn imposter_mean(&self) -> Option<f64> {
        mean(&self.imposter)
    }

    /// Most frequent imposter score (lowest on ties).
    pub fn imposter_mode(&self) -> Option<usize> {
        mode(&self.imposter)
    }

    pub fn genuine_mode(&self) -> Option<usize> {
        mode(&self.genuine)
    }

    /// `score,genuine,imposter` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("score,genuine,imposter\n");
        for s in 0..=self.n_total {
            out.push_str(&format!("{s},{},{}\n", self.genuine[s], self.imposter[s]));
        }
        out
    }
}

impl Benchmark {
    /// Every unordered pair of benchmark samples (enrolled and probes), both
    /// binarized under the model of the pair's first sample. Same-label pairs
    /// are genuine, the rest imposter.
    pub fn histograms(&self) -> Result<Histograms, EvalError> {
        let samples: Vec<(usize, &FeatureVector)> = self
            .classes
            .iter()
            .enumerate()
            .flat_map(|(c, class)| class.enrolled.iter().chain(&class.probes).map(move |v| (c, v)))
            .collect();
        if samples.len() < 2 {
            return Err(EvalError::Degenerate(
                "histograms need at least two samples".into(),
            ));
        }
        let binarized: Vec<Vec<BitString>> = self
            .classes
            .iter()
            .map(|class| {
                samples
                    .iter()
                    .map(|(_, v)| binarize_query(&class.enrollment.record, &v.values))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        let n_total = self.config.n_total();
        let mut genuine = vec![0u64; n_total + 1];
        let mut imposter = vec![0u64; n_total + 1];
        for i in 0..samples.len() {
            let model = &binarized[samples[i].0];
            for j in i + 1..samples.len() {
                let score = n_total - (&model[i] ^ &model[j]).weight();
                if samples[i].0 == samples[j].0 {
                    genuine[score] += 1;
                } else {
                    imposter[score] += 1;
                }
            }
        }
        Ok(Histograms {
            schema_version: REPORT_SCHEMA,
            n_total,
            genuine,
            imposter,
        })
    }
}

/// Enrolls every class on all of its samples and histograms all sample
/// pairs. A single class (no imposter pairs) is allowed.
pub fn genuine_imposter_histograms(
    dataset: &[FeatureVector],
    config: &StageConfig,
    seed: u64,
) -> Result<Histograms, EvalError> {
    if dataset.len() < 2 {
        return Err(EvalError::Degenerate(
            "histograms need at least two samples".into(),
        ));
    }
    Benchmark::build(dataset, config, usize::MAX, seed)?.histograms()
}

/// Binary match scores of `pairs` independent uniformly random `n`-bit
/// template pairs.
pub fn random_pair_scores(n: usize, pairs: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeded(seed);
    (0..pairs)
        .map(|_| {
            let a = BitString::random(&mut rng, n);
            let b = BitString::random(&mut rng, n);
            n - (&a ^ &b).weight()
        })
        .collect()
}
