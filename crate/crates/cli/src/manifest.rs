//! Split and run manifests: enough recorded state to re-run and verify any
//! prior result, with content hashes for every output file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SPLIT_MANIFEST_VERSION: u32 = 1;
pub const RUN_MANIFEST_VERSION: u32 = 1;

/// Persisted by `train`: the exact dataset recipe and the sessions that
/// landed in the test half.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SplitManifest {
    pub format_version: u32,
    pub seed: u64,
    pub subsample_target: usize,
    pub test_fraction: f64,
    pub weight_mode: String,
    pub criterion: String,
    pub max_depth: u32,
    pub min_samples_split: usize,
    pub source_rows: usize,
    pub labeled_rows: usize,
    pub subsample_rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub test_sessions: Vec<u32>,
}

impl SplitManifest {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!(
                "cannot read split manifest {}: {e}",
                path.display()
            ))
        })?;
        let manifest: SplitManifest = serde_json::from_str(&text).map_err(|e| {
            CliError::Runtime(format!("bad split manifest {}: {e}", path.display()))
        })?;
        if manifest.format_version != SPLIT_MANIFEST_VERSION {
            return Err(CliError::Runtime(format!(
                "unsupported split manifest version {}",
                manifest.format_version
            )));
        }
        Ok(manifest)
    }
}

/// One named output file with its content hash.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ArtifactEntry {
    pub name: String,
    pub path: String,
    pub sha256: String,
}

/// Written by `pipeline`: config, seed, versions and hashes of every file
/// the run produced. The five stage artifacts are listed first; figure feeds
/// and per-metric CSVs land under `aux_outputs`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub format_version: u32,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub versions: BTreeMap<String, String>,
    pub artifacts: Vec<ArtifactEntry>,
    pub aux_outputs: Vec<ArtifactEntry>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Runtime(format!("cannot hash {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

pub fn artifact_entry(name: &str, root: &Path, relative: &str) -> Result<ArtifactEntry, CliError> {
    Ok(ArtifactEntry {
        name: name.to_string(),
        path: relative.to_string(),
        sha256: sha256_file(&root.join(relative))?,
    })
}
