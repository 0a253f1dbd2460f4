use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use encircle::linalg::{c, CVec2};
use encircle::{HamiltonianSpec, LoopSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::presets;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InitialState {
    Alpha,
    Beta,
    /// Components `[[re, im], [re, im]]`.
    Custom([[f64; 2]; 2]),
}

impl InitialState {
    pub fn custom_vector(&self) -> Option<CVec2> {
        match self {
            Self::Custom([a, b]) => Some(CVec2::new(c(a[0], a[1]), c(b[0], b[1]))),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    Trajectory,
    RSeries,
    Vorticity,
    Classification,
    RiemannMesh,
}

fn default_emit() -> BTreeSet<Emit> {
    [Emit::Trajectory, Emit::RSeries, Emit::Vorticity, Emit::Classification].into_iter().collect()
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub hamiltonian: HamiltonianSpec,
    #[serde(rename = "loop")]
    pub path: LoopSpec,
    pub initial_state: InitialState,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default = "default_emit")]
    pub emit: BTreeSet<Emit>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> CliResult<()> {
        self.hamiltonian.validate()?;
        self.path.validate()?;
        if let Some(v) = self.initial_state.custom_vector() {
            if !v.is_finite() || v.norm() == 0.0 {
                return Err(CliError::invalid("initial_state", "custom state must be finite and nonzero"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }
}

/// A config given either inline or as a preset name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConfigSource {
    Preset(String),
    Inline(Box<ScenarioConfig>),
}

impl ConfigSource {
    pub fn resolve(&self) -> CliResult<ScenarioConfig> {
        match self {
            Self::Preset(name) => presets::preset(name),
            Self::Inline(cfg) => {
                cfg.validate()?;
                Ok((**cfg).clone())
            }
        }
    }
}
