//! Run manifests: what was run, on which inputs, with which configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::formats::{read_json, write_json};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_snapshot: Config,
    /// SHA-256 of every input file, keyed by path as given.
    pub input_hashes: BTreeMap<String, String>,
    pub seed: u64,
    /// RFC 3339 UTC time the run finished.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: &Config, seed: u64) -> Self {
        RunManifest {
            command: command.into(),
            config_snapshot: config.clone(),
            input_hashes: BTreeMap::new(),
            seed,
            timestamp: String::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.input_hashes.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn add_inputs<'a>(&mut self, paths: impl IntoIterator<Item = &'a PathBuf>) -> Result<()> {
        paths.into_iter().try_for_each(|p| self.add_input(p))
    }

    /// Stamps the time and writes `manifest.json` into `dir`, replacing any
    /// earlier manifest there.
    pub fn write(mut self, dir: &Path) -> Result<PathBuf> {
        self.timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        let path = dir.join(MANIFEST_FILE);
        write_json(&path, &self)?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<RunManifest> {
        read_json(&dir.join(MANIFEST_FILE))
    }

    /// Same command, configuration and input contents; the timestamp is ignored.
    pub fn same_inputs(&self, other: &RunManifest) -> bool {
        self.command == other.command
            && self.config_snapshot == other.config_snapshot
            && self.seed == other.seed
            && self.input_hashes.values().eq(other.input_hashes.values())
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
