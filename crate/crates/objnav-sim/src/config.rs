//! Run configuration: one versioned TOML document covering every tunable
//! block, all optional with the standard defaults.

use std::path::Path;

use anyhow::{bail, Context, Result};
use objnav_core::goalnav::{DetectorConfig, GoalConfig};
use objnav_core::planner::PlannerConfig;
use objnav_core::runner::{FrontierConfig, HistoryConfig, NavConfig, ValueMapConfig};
use objnav_core::world::SensorConfig;
use serde::{Deserialize, Serialize};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeBlock {
    pub max_steps: u32,
    pub success_radius_m: f64,
    pub require_visibility: bool,
}

impl Default for EpisodeBlock {
    fn default() -> Self {
        Self {
            max_steps: 500,
            success_radius_m: 1.0,
            require_visibility: true,
        }
    }
}

/// Remote completion endpoint settings.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    /// `http://host:port/path`
    pub endpoint: String,
    pub model: String,
    pub max_tokens: u32,
    pub timeout_ms: u64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8073/completion".into(),
            model: "default".into(),
            max_tokens: 64,
            timeout_ms: 10_000,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub episode: EpisodeBlock,
    pub sensor: SensorConfig,
    pub valuemap: ValueMapConfig,
    pub history: HistoryConfig,
    pub detector: DetectorConfig,
    pub frontier: FrontierConfig,
    pub planner: PlannerConfig,
    pub goal: GoalConfig,
    pub remote: RemoteConfig,
}

fn default_version() -> u32 {
    CONFIG_VERSION
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("parsing run config")?;
        if cfg.version != CONFIG_VERSION {
            bail!(
                "unsupported config version {} (expected {})",
                cfg.version,
                CONFIG_VERSION
            );
        }
        cfg.sensor
            .validate()
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text)
    }

    /// The core-side view of this config.
    pub fn nav_config(&self) -> NavConfig {
        NavConfig {
            sensor: self.sensor,
            valuemap: self.valuemap,
            history: self.history,
            detector: self.detector,
            frontier: self.frontier,
            planner: self.planner,
            goal: self.goal,
            require_visibility: self.episode.require_visibility,
        }
    }
}
