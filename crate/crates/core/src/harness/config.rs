use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::experiment::ExperimentConfig;
use super::train::TrainConfig;
use crate::de::DEConfig;
use crate::error::{Error, Result};
use crate::synth::PlantSpec;

/// Default locations; command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub data: Option<PathBuf>,
    pub models: Option<PathBuf>,
    pub results: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// TOML configuration with `[paths]`, `[synth]`, `[train]`, `[optimize]` and
/// `[experiment]` sections; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub paths: Paths,
    pub synth: PlantSpec,
    pub train: TrainConfig,
    pub optimize: DEConfig,
    pub experiment: ExperimentConfig,
}

impl HarnessConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(toml::from_str(&text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}
