// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Content-addressed files under `<run>/artifacts`. Without a directory the
/// store only computes names.
#[derive(Debug, Clone)]
pub struct ArtifactStore {
    root: Option<PathBuf>,
}

impl ArtifactStore {
    pub fn new(run_dir: Option<&Path>) -> Self {
        ArtifactStore { root: run_dir.map(Path::to_path_buf) }
    }

    /// Stores `text` and returns its path relative to the run directory.
    pub fn put(&self, text: &str, ext: &str) -> std::io::Result<String> {
        let rel = format!("artifacts/{}.{ext}", sha256_hex(text.as_bytes()));
        if let Some(root) = &self.root {
            let path = root.join(&rel);
            if !path.exists() {
                write_atomic(&path, text.as_bytes())?;
            }
        }
        Ok(rel)
    }
}

/// Writes through a temporary file in the same directory and renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    std::fs::write(tmp.path(), bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
