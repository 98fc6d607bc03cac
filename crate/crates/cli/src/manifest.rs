//! Dataset manifests: UTF-8 CSV with header
//! `clip_id,audio_path,video_source,label,split`.
//!
//! `video_source` is either a directory of frame PNGs or a `.emb` file with
//! precomputed video embeddings. Relative paths resolve against the
//! manifest's own directory. The class list is the sorted set of labels.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use maivar_core::fusion::{ClipRef, Split};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub clip_id: String,
    pub audio_path: String,
    pub video_source: String,
    pub label: String,
    pub split: String,
}

#[derive(Debug, Clone)]
pub struct DatasetManifest {
    base_dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
    pub classes: Vec<String>,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| {
            CliError::validation(format!("cannot read manifest {}: {e}", path.display()))
        })?;
        let mut entries = Vec::new();
        for row in reader.deserialize::<ManifestEntry>() {
            let entry =
                row.map_err(|e| CliError::validation(format!("bad manifest row: {e}")))?;
            entries.push(entry);
        }
        let base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Self::from_entries(base_dir, entries)
    }

    pub fn from_entries(base_dir: PathBuf, entries: Vec<ManifestEntry>) -> CliResult<Self> {
        if entries.is_empty() {
            return Err(CliError::validation("manifest has no entries"));
        }
        let mut seen = BTreeSet::new();
        let mut labels = BTreeSet::new();
        for e in &entries {
            if !seen.insert(e.clip_id.as_str()) {
                return Err(CliError::validation(format!(
                    "duplicate clip_id {:?} in manifest",
                    e.clip_id
                )));
            }
            if e.split != "train" && e.split != "test" {
                return Err(CliError::validation(format!(
                    "clip {:?}: split must be train or test, got {:?}",
                    e.clip_id, e.split
                )));
            }
            labels.insert(e.label.clone());
        }
        let classes: Vec<String> = labels.into_iter().collect();
        Ok(Self {
            base_dir,
            entries,
            classes,
        })
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let mut writer = csv::Writer::from_path(path)
            .map_err(|e| CliError::runtime(format!("cannot write manifest: {e}")))?;
        for e in &self.entries {
            writer
                .serialize(e)
                .map_err(|e| CliError::runtime(format!("cannot write manifest row: {e}")))?;
        }
        writer
            .flush()
            .map_err(|e| CliError::runtime(format!("cannot flush manifest: {e}")))?;
        Ok(())
    }

    /// Resolves a manifest-relative path.
    pub fn resolve(&self, p: &str) -> PathBuf {
        let path = Path::new(p);
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn label_index(&self, label: &str) -> usize {
        self.classes
            .binary_search_by(|c| c.as_str().cmp(label))
            .expect("label came from this manifest")
    }

    /// Entries as fusion clip references (label resolved to class index).
    pub fn clip_refs(&self) -> Vec<ClipRef> {
        self.entries
            .iter()
            .map(|e| ClipRef {
                clip_id: e.clip_id.clone(),
                label: self.label_index(&e.label),
                split: if e.split == "train" {
                    Split::Train
                } else {
                    Split::Test
                },
            })
            .collect()
    }

    /// Training commands need both splits present.
    pub fn require_both_splits(&self) -> CliResult<()> {
        let has = |s: &str| self.entries.iter().any(|e| e.split == s);
        if !has("train") || !has("test") {
            return Err(CliError::validation(
                "manifest must contain both train and test entries",
            ));
        }
        Ok(())
    }
}
