//! Labeled real-valued feature vectors: file I/O, a seeded synthetic class
//! generator standing in for face databases, and the real-valued match score.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::seeded;
use crate::wire::{Reader, WireError, Writer};

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("feature file is empty")]
    Empty,
    #[error("row {row}: expected {expected} values, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {column}: cannot parse {cell:?} as a number")]
    Parse { row: usize, column: usize, cell: String },
    #[error("row {row}, column {column}: value is not finite")]
    NonFinite { row: usize, column: usize },
    #[error("row {row}: empty label")]
    EmptyLabel { row: usize },
    #[error("row {row}: no feature values")]
    NoValues { row: usize },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("packed feature file: {0}")]
    Wire(#[from] WireError),
    #[error("vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub label: String,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        FeatureVector {
            label: label.into(),
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureFormat {
    /// `label,v1,...,vd` per line, no header.
    Csv,
    /// Binary: magic `BDAF`, version, dimension, count, vectors, CRC-32.
    Packed,
}

impl FeatureFormat {
    /// `.bdaf` files are packed, anything else is CSV.
    pub fn from_path(path: &Path) -> FeatureFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bdaf") => FeatureFormat::Packed,
            _ => FeatureFormat::Csv,
        }
    }
}

const PACKED_MAGIC: &[u8; 4] = b"BDAF";
const PACKED_VERSION: u8 = 1;

pub fn load_features(path: &Path, format: FeatureFormat) -> Result<Vec<FeatureVector>, VectorError> {
    let bytes = std::fs::read(path).map_err(|source| VectorError::Io {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        FeatureFormat::Csv => parse_csv(&bytes),
        FeatureFormat::Packed => decode_packed(&bytes),
    }
}

pub fn write_features(
    path: &Path,
    vectors: &[FeatureVector],
    format: FeatureFormat,
) -> Result<(), VectorError> {
    let bytes = match format {
        FeatureFormat::Csv => to_csv(vectors),
        FeatureFormat::Packed => encode_packed(vectors)?,
    };
    let io = |source| VectorError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(&bytes).map_err(io)
}

/// Parses CSV feature rows. Rows are numbered from 1.
pub fn parse_csv(bytes: &[u8]) -> Result<Vec<FeatureVector>, VectorError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut out = Vec::new();
    let mut dim = None;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let label = record.get(0).unwrap_or("");
        if label.is_empty() {
            return Err(VectorError::EmptyLabel { row });
        }
        let found = record.len() - 1;
        if found == 0 {
            return Err(VectorError::NoValues { row });
        }
        let expected = *dim.get_or_insert(found);
        if found != expected {
            return Err(VectorError::Ragged { row, expected, found });
        }
        let values = record
            .iter()
            .enumerate()
            .skip(1)
            .map(|(column, cell)| {
                let v: f64 = cell.parse().map_err(|_| VectorError::Parse {
                    row,
                    column,
                    cell: cell.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(VectorError::NonFinite { row, column });
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(FeatureVector::new(label, values));
    }
    if out.is_empty() {
        return Err(VectorError::Empty);
    }
    Ok(out)
}

/// Canonical CSV: shortest round-trip float formatting, `\n` line endings.
pub fn to_csv(vectors: &[FeatureVector]) -> Vec<u8> {
    let mut out = String::new();
    for v in vectors {
        out.push_str(&v.label);
        for x in &v.values {
            out.push(',');
            out.push_str(&x.to_string());
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub fn encode_packed(vectors: &[FeatureVector]) -> Result<Vec<u8>, VectorError> {
    let dim = vectors.first().map_or(0, FeatureVector::dim);
    let mut w = Writer::new();
    w.bytes(PACKED_MAGIC);
    w.u8(PACKED_VERSION);
    w.u32(dim as u32);
    w.u32(vectors.len() as u32);
    for v in vectors {
        if v.dim() != dim {
            return Err(VectorError::LengthMismatch(v.dim(), dim));
        }
        w.str16(&v.label);
        v.values.iter().for_each(|&x| w.f64(x));
    }
    Ok(w.finish_with_crc())
}

pub fn decode_packed(bytes: &[u8]) -> Result<Vec<FeatureVector>, VectorError> {
    if bytes.is_empty() {
        return Err(VectorError::Empty);
    }
    let mut r = Reader::new(bytes);
    r.magic(PACKED_MAGIC)?;
    let version = r.u8()?;
    if version != PACKED_VERSION {
        return Err(WireError::UnsupportedVersion(version).into());
    }
    let dim = r.u32()? as usize;
    let count = r.u32()? as usize;
    let mut out = Vec::with_capacity(count.min(1 << 16));
    for i in 0..count {
        let row = i + 1;
        let label = r.str16()?;
        if label.is_empty() {
            return Err(VectorError::EmptyLabel { row });
        }
        let values = (0..dim).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
        if let Some(column) = values.iter().position(|v| !v.is_finite()) {
            return Err(VectorError::NonFinite {
                row,
                column: column + 1,
            });
        }
        out.push(FeatureVector::new(label, values));
    }
    r.finish_with_crc()?;
    if out.is_empty() {
        return Err(VectorError::Empty);
    }
    Ok(out)
}

/// Parameters of the synthetic class-structured dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub num_classes: usize,
    pub samples_per_class: usize,
    pub dim: usize,
    /// Standard deviation of class-center coordinates.
    pub class_center_scale: f64,
    /// Standard deviation of per-sample noise around the class center.
    pub within_sigma: f64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), VectorError> {
        if self.num_classes == 0 {
            return Err(VectorError::InvalidSpec("zero classes"));
        }
        if self.samples_per_class == 0 {
            return Err(VectorError::InvalidSpec("zero samples per class"));
        }
        if self.dim == 0 {
            return Err(VectorError::InvalidSpec("zero dimension"));
        }
        if !(self.class_center_scale > 0.0 && self.class_center_scale.is_finite()) {
            return Err(VectorError::InvalidSpec("class_center_scale must be positive"));
        }
        if !(self.within_sigma >= 0.0 && self.within_sigma.is_finite()) {
            return Err(VectorError::InvalidSpec("within_sigma must be non-negative"));
        }
        Ok(())
    }

    pub fn is_separable(&self) -> bool {
        self.within_sigma < self.class_center_scale
    }
}

pub fn class_label(c: usize) -> String {
    format!("c{c}")
}

/// Class centers, in class order. The generator draws all centers first, so
/// these are exactly the centers [`synth_classes`] samples around.
pub fn synth_centers(spec: &SynthSpec) -> Result<Vec<Vec<f64>>, VectorError> {
    spec.validate()?;
    let mut rng = seeded(spec.seed);
    Ok(draw_centers(spec, &mut rng))
}

fn draw_centers<R: Rng>(spec: &SynthSpec, rng: &mut R) -> Vec<Vec<f64>> {
    (0..spec.num_classes)
        .map(|_| {
            (0..spec.dim)
                .map(|_| spec.class_center_scale * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect()
}

/// `num_classes * samples_per_class` vectors, class-major, labels `c0`, `c1`, ...
pub fn synth_classes(spec: &SynthSpec) -> Result<Vec<FeatureVector>, VectorError> {
    spec.validate()?;
    if !spec.is_separable() {
        log::warn!(
            "within_sigma {} >= class_center_scale {}: classes will overlap",
            spec.within_sigma,
            spec.class_center_scale
        );
    }
    let mut rng = seeded(spec.seed);
    let centers = draw_centers(spec, &mut rng);
    let mut out = Vec::with_capacity(spec.num_classes * spec.samples_per_class);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..spec.samples_per_class {
            let values = center
                .iter()
                .map(|&mu| mu + spec.within_sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            out.push(FeatureVector::new(class_label(c), values));
        }
    }
    Ok(out)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, VectorError> {
    if a.len() != b.len() {
        return Err(VectorError::LengthMismatch(a.len(), b.len()));
    }
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((dot(a, b) / denom).clamp(-1.0, 1.0))
}

/// `round(scale * max(0, cos(a, b)))`. A zero vector scores 0 against anything.
pub fn real_match_score(a: &[f64], b: &[f64], scale: u32) -> Result<u32, VectorError> {
    let cos = cosine_similarity(a, b)?;
    Ok((scale as f64 * cos.max(0.0)).round() as u32)
}

/// Coordinate-wise mean. Panics on an empty slice.
pub fn centroid<'a>(vectors: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut iter = vectors.into_iter();
    let first = iter.next().expect("centroid of no vectors");
    let mut sum = first.to_vec();
    let mut count = 1usize;
    for v in iter {
        sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
        count += 1;
    }
    sum.iter_mut().for_each(|s| *s /= count as f64);
    sum
}
