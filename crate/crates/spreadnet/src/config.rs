//! Layered run configuration: built-in defaults, then a TOML file, then
//! command-line flags.
//!
//! ```toml
//! seed = 7
//!
//! [ingest]
//! week_start = "sun"
//! drop_low_density = false
//!
//! [hotspot]
//! threshold = 3
//!
//! [learner]
//! lookback = 4
//! lambda1 = 0.01
//!
//! [analysis]
//! top_k = 10
//! population_mode = "raw"
//!
//! [synth]
//! regions = 20
//! ```
//!
//! The top-level `seed`, when present, replaces the learner and synth seeds so
//! one number governs every random draw of a run.

use std::path::{Path, PathBuf};

use chrono::Weekday;
use serde::{Deserialize, Serialize};
use spreadnet_core::hotspot::DEFAULT_THRESHOLD;
use spreadnet_core::learner::LearnerConfig;
use spreadnet_core::synth::SynthScenario;

use crate::error::{Error, Result};
use crate::ingest::SnapshotColumns;

/// Directory that relative `--config` paths resolve against, and where
/// `spreadnet.toml` is picked up when no `--config` is given.
pub const HOME_ENV: &str = "SPREADNET_HOME";
pub const DEFAULT_FILE: &str = "spreadnet.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PopulationMode {
    #[default]
    Raw,
    Density,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    /// First day of the epidemiological week (`sun`, `mon`, ...).
    pub week_start: String,
    /// Remove subzones below 10 people per km² from the index.
    pub drop_low_density: bool,
    pub columns: SnapshotColumns,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            week_start: "sun".into(),
            drop_low_density: false,
            columns: SnapshotColumns::default(),
        }
    }
}

impl IngestConfig {
    pub fn weekday(&self) -> Result<Weekday> {
        self.week_start
            .parse()
            .map_err(|_| Error::Usage(format!("unknown week_start {:?}", self.week_start)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HotspotConfig {
    pub threshold: u32,
}

impl Default for HotspotConfig {
    fn default() -> Self {
        HotspotConfig {
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub top_k: usize,
    pub population_mode: PopulationMode,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            top_k: 10,
            population_mode: PopulationMode::Raw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub ingest: IngestConfig,
    pub hotspot: HotspotConfig,
    pub learner: LearnerConfig,
    pub analysis: AnalysisConfig,
    pub synth: SynthScenario,
}

impl Config {
    pub fn parse(text: &str, path: &Path) -> Result<Config> {
        toml::from_str(text).map_err(|source| Error::Toml {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        Config::parse(&text, path)
    }

    /// Loads the explicit file, else `$SPREADNET_HOME/spreadnet.toml` when it
    /// exists, else defaults. Returns the file actually read.
    pub fn load(explicit: Option<&Path>) -> Result<(Config, Option<PathBuf>)> {
        let home = std::env::var_os(HOME_ENV).map(PathBuf::from);
        let path = match (explicit, &home) {
            (Some(p), Some(h)) if p.is_relative() => Some(h.join(p)),
            (Some(p), _) => Some(p.to_path_buf()),
            (None, Some(h)) => Some(h.join(DEFAULT_FILE)).filter(|p| p.is_file()),
            (None, None) => None,
        };
        match path {
            Some(p) => Ok((Config::read(&p)?, Some(p))),
            None => Ok((Config::default(), None)),
        }
    }

    /// Propagates the top-level seed into every seeded section.
    pub fn resolve(mut self) -> Config {
        if let Some(seed) = self.seed {
            self.learner.seed = seed;
            self.synth.seed = seed;
        }
        self
    }
}
