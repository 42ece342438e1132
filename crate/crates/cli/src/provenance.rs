//! Provenance stamping: every CLI run records the config hash, seed, and
//! tool version in its outputs (JSON field, CSV comment lines, or a sidecar
//! file next to binary artifacts). All fields are deterministic so reruns
//! stay byte-identical.

use std::path::Path;

use serde::{Deserialize, Serialize};

use csi_meta::error::Result;

/// FNV-1a 64-bit hash; good enough to identify a config document.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub command: String,
}

impl Provenance {
    pub fn new(config_bytes: &[u8], seed: u64, command: &str) -> Self {
        Self {
            tool: "csimeta".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: format!("{:016x}", fnv1a64(config_bytes)),
            seed,
            command: command.to_string(),
        }
    }

    /// Writes the `<artifact>.prov.json` sidecar for a binary artifact.
    pub fn write_sidecar(&self, artifact: &Path) -> Result<()> {
        let mut path = artifact.as_os_str().to_owned();
        path.push(".prov.json");
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| csi_meta::error::Error::format(format!("{e}")))?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }

    /// Comment lines for the head of a CSV log.
    pub fn csv_comments(&self) -> String {
        format!(
            "# tool={} version={} config_hash={} seed={} command={}\n",
            self.tool, self.version, self.config_hash, self.seed, self.command
        )
    }
}
