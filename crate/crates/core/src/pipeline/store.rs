//! File-backed template store.
//!
//! Layout under the root directory:
//!
//! ```text
//! index.json          registry seed, next registry slot, user -> record file
//! <sha256(user)>.bdat one record per user
//! <sha256(user)>.lock per-user advisory lock for enroll/revoke
//! index.lock          guards read-modify-write of index.json
//! ```
//!
//! Every file is replaced by writing a temporary sibling and renaming it over
//! the target, so readers see either the old or the new contents. Writers on
//! the same user serialize on its lock file; verification takes no locks.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::vectors::FeatureVector;

use super::record::{deserialize_record, serialize_record, TemplateRecord};
use super::registry::TargetRegistry;
use super::{
    enroll_with_target, verify_record, EnrollOptions, EnrollSeeds, Enrollment, PipelineError, StageConfig,
    Verification,
};

const INDEX_FILE: &str = "index.json";
const INDEX_LOCK: &str = "index.lock";
const INDEX_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Index {
    schema: u32,
    registry_seed: u64,
    next_slot: u64,
    users: BTreeMap<String, IndexEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IndexEntry {
    file: String,
    slot: u64,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// A fully written temporary file that becomes visible only on [`commit`](StagedWrite::commit).
/// Dropping it uncommitted removes the temporary file and leaves the target untouched.
pub struct StagedWrite {
    tmp: NamedTempFile,
    target: PathBuf,
}

impl StagedWrite {
    pub fn stage(target: &Path, bytes: &[u8]) -> Result<StagedWrite, PipelineError> {
        let dir = target.parent().unwrap_or(Path::new("."));
        let mut tmp = NamedTempFile::with_prefix_in(".staged-", dir).map_err(io_err(dir))?;
        tmp.write_all(bytes).map_err(io_err(tmp.path()))?;
        tmp.as_file().sync_all().map_err(io_err(target))?;
        Ok(StagedWrite {
            tmp,
            target: target.to_path_buf(),
        })
    }

    pub fn commit(self) -> Result<(), PipelineError> {
        let target = self.target;
        self.tmp.persist(&target).map_err(|e| io_err(&target)(e.error))?;
        Ok(())
    }
}

fn write_atomic(target: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    StagedWrite::stage(target, bytes)?.commit()
}

/// Holds an exclusive advisory lock until dropped.
struct LockGuard(File);

impl LockGuard {
    fn acquire(path: &Path) -> Result<LockGuard, PipelineError> {
        let f = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(path)
            .map_err(io_err(path))?;
        f.lock().map_err(io_err(path))?;
        Ok(LockGuard(f))
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = self.0.unlock();
    }
}

impl Store {
    /// Opens (creating if needed) a store. `registry_seed` only matters when
    /// the store is new: it fixes the sequence of user targets.
    pub fn open(root: impl Into<PathBuf>, registry_seed: u64) -> Result<Store, PipelineError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        let store = Store { root };
        let _lock = LockGuard::acquire(&store.root.join(INDEX_LOCK))?;
        if !store.index_path().exists() {
            store.write_index(&Index {
                schema: INDEX_SCHEMA,
                registry_seed,
                next_slot: 0,
                users: BTreeMap::new(),
            })?;
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn index_path(&self) -> PathBuf {
        self.root.join(INDEX_FILE)
    }

    fn user_stem(user_id: &str) -> String {
        hex::encode(Sha256::digest(user_id.as_bytes()))
    }

    pub fn record_path(&self, user_id: &str) -> PathBuf {
        self.root.join(format!("{}.bdat", Self::user_stem(user_id)))
    }

    fn read_index(&self) -> Result<Index, PipelineError> {
        let path = self.index_path();
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        serde_json::from_slice(&bytes).map_err(|source| PipelineError::Index {
            path: path.display().to_string(),
            source,
        })
    }

    fn write_index(&self, index: &Index) -> Result<(), PipelineError> {
        let bytes = serde_json::to_vec_pretty(index).expect("index serializes");
        write_atomic(&self.index_path(), &bytes)
    }

    pub fn users(&self) -> Result<Vec<String>, PipelineError> {
        Ok(self.read_index()?.users.into_keys().collect())
    }

    pub fn is_enrolled(&self, user_id: &str) -> Result<bool, PipelineError> {
        Ok(self.read_index()?.users.contains_key(user_id))
    }

    pub fn load(&self, user_id: &str) -> Result<TemplateRecord, PipelineError> {
        if !self.is_enrolled(user_id)? {
            return Err(PipelineError::UnknownUser(user_id.to_string()));
        }
        let path = self.record_path(user_id);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        deserialize_record(&bytes).map_err(|source| PipelineError::Record {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn verify(&self, user_id: &str, query: &[f64]) -> Result<Verification, PipelineError> {
        verify_record(&self.load(user_id)?, query)
    }

    pub fn enroll(
        &self,
        user_id: &str,
        training: &[FeatureVector],
        config: &StageConfig,
        seeds: EnrollSeeds,
        options: &EnrollOptions,
    ) -> Result<Enrollment, PipelineError> {
        let _user = LockGuard::acquire(&self.root.join(format!("{}.lock", Self::user_stem(user_id))))?;
        if !options.overwrite && self.is_enrolled(user_id)? {
            return Err(PipelineError::Duplicate(user_id.to_string()));
        }
        self.issue(user_id, training, config, seeds, options)
    }

    /// Reissues a user's record under fresh seeds and a fresh target, keeping
    /// the stored configuration.
    pub fn revoke(
        &self,
        user_id: &str,
        training: &[FeatureVector],
        seeds: EnrollSeeds,
        options: &EnrollOptions,
    ) -> Result<Enrollment, PipelineError> {
        let _user = LockGuard::acquire(&self.root.join(format!("{}.lock", Self::user_stem(user_id))))?;
        let old = self.load(user_id)?;
        self.issue(user_id, training, &old.config, seeds, options)
    }

    fn issue(
        &self,
        user_id: &str,
        training: &[FeatureVector],
        config: &StageConfig,
        seeds: EnrollSeeds,
        options: &EnrollOptions,
    ) -> Result<Enrollment, PipelineError> {
        let code = config.validate()?;
        let _index = LockGuard::acquire(&self.root.join(INDEX_LOCK))?;
        let mut index = self.read_index()?;
        let slot = index.next_slot;
        let target = TargetRegistry::new(index.registry_seed).target_at(&code, config.blocks, slot)?;
        let enrollment = enroll_with_target(user_id, training, config, seeds, &target, options)?;
        let path = self.record_path(user_id);
        write_atomic(&path, &serialize_record(&enrollment.record))?;
        index.next_slot += 1;
        index.users.insert(
            user_id.to_string(),
            IndexEntry {
                file: path.file_name().unwrap().to_string_lossy().into_owned(),
                slot,
            },
        );
        self.write_index(&index)?;
        Ok(enrollment)
    }
}
