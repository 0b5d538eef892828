use serde::{Deserialize, Serialize};
use std::path::Path;

use super::output::OutputFile;
use super::Invocation;
use crate::device::DeviceConfig;
use crate::error::{Error, Result};

/// Record of one CLI run, written next to its artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    /// Parsed command with every default filled in.
    pub invocation: Invocation,
    /// Device after presets, config files and overrides were applied.
    pub config: DeviceConfig,
    pub version: String,
    pub seed: Option<u64>,
    pub wall_time_seconds: f64,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn file_name(command: &str) -> String {
        format!("{command}.manifest.json")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("malformed manifest {}: {e}", path.display())))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        std::fs::write(dir.join(Self::file_name(&self.command)), bytes)?;
        Ok(())
    }
}
