use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// A written artifact and its content hash.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct OutputFile {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects artifacts for one run in a single directory.
pub struct ArtifactWriter {
    dir: PathBuf,
    prefix: String,
    written: Vec<OutputFile>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path, prefix: &str) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(ArtifactWriter { dir: dir.to_path_buf(), prefix: prefix.to_string(), written: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn put(&mut self, suffix: &str, bytes: &[u8]) -> Result<()> {
        let name = format!("{}{}", self.prefix, suffix);
        fs::write(self.dir.join(&name), bytes)?;
        self.written.push(OutputFile { path: name, sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, suffix: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.put(suffix, &bytes)
    }

    /// One header row, then one row per record.
    pub fn csv<T: Serialize>(&mut self, suffix: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        self.put(suffix, &bytes)
    }

    pub fn finish(self) -> Vec<OutputFile> {
        self.written
    }
}
