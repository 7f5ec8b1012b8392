//! Run manifest: the inventory of a run directory, written last.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::LabError;

pub const MANIFEST_NAME: &str = "manifest.json";
pub const TOOL: &str = "ipm-lab";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Pass,
    ToleranceFailure,
    ConfigurationError,
    BlowUp,
}

impl RunStatus {
    pub fn from_exit_code(code: i32) -> Self {
        match code {
            crate::error::exit::PASS => RunStatus::Pass,
            crate::error::exit::TOLERANCE => RunStatus::ToleranceFailure,
            crate::error::exit::BLOW_UP => RunStatus::BlowUp,
            _ => RunStatus::ConfigurationError,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub kind: String,
    /// The validated experiment specification with defaults filled in.
    pub spec: serde_json::Value,
    pub started: String,
    pub finished: String,
    pub status: RunStatus,
    pub exit_code: i32,
    pub error: Option<String>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_entry(root: &Path, rel: &str) -> Result<FileEntry, LabError> {
    let path = root.join(rel);
    let bytes = std::fs::read(&path).map_err(|e| LabError::io(&path, e))?;
    Ok(FileEntry { path: rel.to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 })
}

pub fn write_manifest(root: &Path, manifest: &RunManifest) -> Result<(), LabError> {
    let path = root.join(MANIFEST_NAME);
    let mut bytes = serde_json::to_vec_pretty(manifest)?;
    bytes.push(b'\n');
    std::fs::write(&path, bytes).map_err(|e| LabError::io(&path, e))
}

/// Reads the manifest of `root` and checks every listed digest.
pub fn verify(root: &Path) -> Result<RunManifest, LabError> {
    let path = root.join(MANIFEST_NAME);
    let bytes = match std::fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(LabError::Integrity(format!("no {MANIFEST_NAME} in {}", root.display())));
        }
        Err(e) => return Err(LabError::io(&path, e)),
    };
    let manifest: RunManifest = serde_json::from_slice(&bytes)
        .map_err(|e| LabError::Integrity(format!("unreadable {MANIFEST_NAME}: {e}")))?;
    for f in &manifest.files {
        let rel = Path::new(&f.path);
        if rel.is_absolute() || rel.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
            return Err(LabError::Integrity(format!("manifest lists a path outside the run: {}", f.path)));
        }
        let p = root.join(rel);
        let data = std::fs::read(&p).map_err(|e| LabError::Integrity(format!("{}: {e}", f.path)))?;
        let digest = sha256_hex(&data);
        if digest != f.sha256 || data.len() as u64 != f.bytes {
            return Err(LabError::Integrity(format!(
                "digest mismatch for {}: manifest {} ({} bytes), found {} ({} bytes)",
                f.path,
                f.sha256,
                f.bytes,
                digest,
                data.len()
            )));
        }
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
