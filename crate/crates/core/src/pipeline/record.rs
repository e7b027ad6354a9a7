//! Byte-packed template records, format version 1.
//!
//! All integers are big-endian. Layout:
//!
//! ```text
//! "BDAT"            4 bytes magic
//! version           u8 (= 1)
//! section 1 config      tag u8, len u32, payload
//! section 2 identity
//! section 3 seed
//! section 4 model
//! section 5 commitments
//! crc32             u32, CRC-32/IEEE of every preceding byte
//! ```
//!
//! Bit strings are packed most-significant-bit first and preceded by their
//! bit length. See `docs/record-format.md` for the field-level layout.

use thiserror::Error;

use crate::bch::CodeSpec;
use crate::bda::{ClassModel, Hyper, TrainMeta};
use crate::bits::BitString;
use crate::commitment::{Commitment, DIGEST_LEN, SALT_LEN};
use crate::wire::{Reader, WireError, Writer};

use super::config::{AcceptPolicy, CohortConfig, StageConfig};

pub const MAGIC: &[u8; 4] = b"BDAT";
pub const VERSION: u8 = 1;

const TAG_CONFIG: u8 = 1;
const TAG_IDENTITY: u8 = 2;
const TAG_SEED: u8 = 3;
const TAG_MODEL: u8 = 4;
const TAG_COMMITMENTS: u8 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error("inconsistent record: {0}")]
    Inconsistent(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateRecord {
    pub user_id: String,
    pub version: u8,
    pub config: StageConfig,
    pub projection_seed: u64,
    /// Helper data: per-bit discriminants.
    pub model: ClassModel,
    /// One per code block.
    pub commitments: Vec<Commitment>,
    /// Unix time in milliseconds.
    pub created_at: i64,
}

pub fn serialize_record(r: &TemplateRecord) -> Vec<u8> {
    let mut w = Writer::new();
    w.bytes(MAGIC);
    w.u8(r.version);

    let c = &r.config;
    let mut s = Writer::new();
    s.u32(c.d as u32);
    s.u32(c.k as u32);
    s.u8(c.code.m as u8);
    s.u8(c.code.t as u8);
    s.u16(c.blocks as u16);
    s.u32(c.perceptron.epochs);
    s.f64(c.perceptron.rate);
    s.u32(c.score_scale);
    s.u32(c.cohort.classes as u32);
    s.u32(c.cohort.samples_per_class as u32);
    s.u8(match c.policy {
        AcceptPolicy::AllBlocks => 0,
    });
    w.section(TAG_CONFIG, s);

    let mut s = Writer::new();
    s.str16(&r.user_id);
    s.i64(r.created_at);
    w.section(TAG_IDENTITY, s);

    let mut s = Writer::new();
    s.u64(r.projection_seed);
    w.section(TAG_SEED, s);

    let m = &r.model;
    let mut s = Writer::new();
    s.str16(&m.class_id);
    s.u32(m.n() as u32);
    s.u32(m.k as u32);
    m.weights.iter().for_each(|&x| s.f64(x));
    m.biases.iter().for_each(|&x| s.f64(x));
    s.u32(m.train_meta.epochs_run);
    s.u32(m.train_meta.residual_bit_errors);
    s.u8(m.train_meta.converged as u8);
    w.section(TAG_MODEL, s);

    let mut s = Writer::new();
    s.u16(r.commitments.len() as u16);
    for cm in &r.commitments {
        s.u8(cm.code.m as u8);
        s.u8(cm.code.t as u8);
        s.u32(cm.mask.len() as u32);
        s.bytes(&cm.mask.to_packed());
        s.bytes(&cm.digest);
        s.bytes(&cm.salt);
    }
    w.section(TAG_COMMITMENTS, s);

    w.finish_with_crc()
}

fn inconsistent<T>(what: &'static str) -> Result<T, RecordError> {
    Err(RecordError::Inconsistent(what))
}

pub fn deserialize_record(bytes: &[u8]) -> Result<TemplateRecord, RecordError> {
    let mut r = Reader::new(bytes);
    r.magic(MAGIC)?;
    let version = r.u8()?;
    if version != VERSION {
        return Err(WireError::UnsupportedVersion(version).into());
    }

    let mut s = r.section(TAG_CONFIG)?;
    let config = StageConfig {
        d: s.u32()? as usize,
        k: s.u32()? as usize,
        code: CodeSpec {
            m: s.u8()? as u32,
            t: s.u8()? as u32,
        },
        blocks: s.u16()? as usize,
        perceptron: Hyper {
            epochs: s.u32()?,
            rate: s.f64()?,
        },
        score_scale: s.u32()?,
        cohort: CohortConfig {
            classes: s.u32()? as usize,
            samples_per_class: s.u32()? as usize,
        },
        policy: match s.u8()? {
            0 => AcceptPolicy::AllBlocks,
            _ => return inconsistent("accept policy"),
        },
    };
    s.expect_end("config section")?;

    let mut s = r.section(TAG_IDENTITY)?;
    let user_id = s.str16()?;
    let created_at = s.i64()?;
    s.expect_end("identity section")?;

    let mut s = r.section(TAG_SEED)?;
    let projection_seed = s.u64()?;
    s.expect_end("seed section")?;

    let mut s = r.section(TAG_MODEL)?;
    let class_id = s.str16()?;
    let n = s.u32()? as usize;
    let k = s.u32()? as usize;
    let weight_count = n.checked_mul(k).filter(|&c| c <= s.remaining() / 8);
    let Some(weight_count) = weight_count else {
        return Err(WireError::Truncated(bytes.len()).into());
    };
    let weights = (0..weight_count)
        .map(|_| s.f64())
        .collect::<Result<Vec<_>, _>>()?;
    let biases = (0..n).map(|_| s.f64()).collect::<Result<Vec<_>, _>>()?;
    let train_meta = TrainMeta {
        epochs_run: s.u32()?,
        residual_bit_errors: s.u32()?,
        converged: match s.u8()? {
            0 => false,
            1 => true,
            _ => return inconsistent("converged flag"),
        },
    };
    s.expect_end("model section")?;
    let model = ClassModel {
        class_id,
        k,
        weights,
        biases,
        train_meta,
    };

    let mut s = r.section(TAG_COMMITMENTS)?;
    let count = s.u16()? as usize;
    let mut commitments = Vec::with_capacity(count);
    for _ in 0..count {
        let code = CodeSpec {
            m: s.u8()? as u32,
            t: s.u8()? as u32,
        };
        let bits = s.u32()? as usize;
        let at = s.pos();
        let mask =
            BitString::from_packed(s.take(bits.div_ceil(8))?, bits).map_err(|_| WireError::Malformed {
                what: "mask padding",
                offset: at,
            })?;
        let digest: [u8; DIGEST_LEN] = s.take(DIGEST_LEN)?.try_into().unwrap();
        let salt: [u8; SALT_LEN] = s.take(SALT_LEN)?.try_into().unwrap();
        commitments.push(Commitment {
            code,
            mask,
            digest,
            salt,
        });
    }
    s.expect_end("commitments section")?;
    r.finish_with_crc()?;

    let record = TemplateRecord {
        user_id,
        version,
        config,
        projection_seed,
        model,
        commitments,
        created_at,
    };
    check_consistency(&record)?;
    Ok(record)
}

fn check_consistency(r: &TemplateRecord) -> Result<(), RecordError> {
    let c = &r.config;
    if c.validate().is_err() {
        return inconsistent("stage configuration");
    }
    if r.model.k != c.k || r.model.n() != c.n_total() {
        return inconsistent("model shape");
    }
    if r.commitments.len() != c.blocks {
        return inconsistent("commitment count");
    }
    if r.commitments
        .iter()
        .any(|cm| cm.code != c.code || cm.mask.len() != c.code.n())
    {
        return inconsistent("commitment code");
    }
    Ok(())
}
