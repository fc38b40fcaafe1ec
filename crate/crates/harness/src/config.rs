//! TOML configuration for every subcommand.
//!
//! All sections are optional and fall back to the desk-scale defaults, but
//! a section that is present must be complete and may not contain unknown
//! keys. Physical quantities carry their unit in the key name (`_m`, `_s`,
//! `_mps`, `_radps`, ...).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use polarnav_core::costmap::ObservationConfig;
use polarnav_core::gridworld::EnvConfig;
use polarnav_core::nav::{DwaConfig, GlobalPlannerConfig, SpConfig};
use polarnav_sac::SacConfig;

use crate::stack::PlannerKind;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config schema error: {0}")]
    Schema(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Training run parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub episodes: usize,
    pub seed: u64,
    /// Periodic checkpoints; 0 disables them.
    pub checkpoint_every_episodes: usize,
    /// Held-out evaluation episodes run after training; 0 skips evaluation.
    pub eval_episodes: usize,
    pub sac: SacConfig,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            episodes: 800,
            seed: 0,
            checkpoint_every_episodes: 0,
            eval_episodes: 100,
            sac: SacConfig::desk(),
        }
    }
}

/// Global plan and waypoint generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NavSection {
    pub waypoint_spacing_m: f64,
    pub waypoint_clearance_m: f64,
    pub global_planner: GlobalPlannerConfig,
}

impl Default for NavSection {
    fn default() -> Self {
        NavSection {
            waypoint_spacing_m: 1.0,
            waypoint_clearance_m: 0.1,
            global_planner: GlobalPlannerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    pub scenarios: Vec<String>,
    pub planners: Vec<PlannerKind>,
    pub runs_per_cell: usize,
    /// Run `i` of a cell uses seed `base_seed + i`.
    pub base_seed: u64,
    /// Checkpoint directory for the SAC planner.
    pub checkpoint: Option<PathBuf>,
    /// Run cells on the rayon pool.
    pub parallel: bool,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        BenchmarkSection {
            scenarios: crate::scenarios::SCENARIO_NAMES.iter().map(|s| s.to_string()).collect(),
            planners: vec![PlannerKind::Sac, PlannerKind::Dwa, PlannerKind::Sp],
            runs_per_cell: 10,
            base_seed: 0,
            checkpoint: None,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarnessConfig {
    pub train: TrainSection,
    pub observation: ObservationConfigSection,
    pub env: EnvConfig,
    pub nav: NavSection,
    pub dwa: DwaConfig,
    pub sp: SpConfig,
    pub benchmark: BenchmarkSection,
}

/// Observation settings; desk scale (40×40 polar) unless overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObservationConfigSection(pub ObservationConfig);

impl Default for ObservationConfigSection {
    fn default() -> Self {
        ObservationConfigSection(ObservationConfig::desk())
    }
}

impl HarnessConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: HarnessConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn observation(&self) -> ObservationConfig {
        self.observation.0
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |r: Result<(), String>, what: &str| r.map_err(|e| ConfigError::Invalid(format!("[{what}] {e}")));
        check(self.train.sac.validate(), "train.sac")?;
        check(self.observation.0.validate(), "observation")?;
        check(self.env.validate(), "env")?;
        check(self.dwa.validate(), "dwa")?;
        if !(self.nav.waypoint_spacing_m > 0.0 && self.nav.waypoint_clearance_m >= 0.0) {
            return Err(ConfigError::Invalid(
                "[nav] waypoint_spacing_m must be positive and waypoint_clearance_m non-negative".into(),
            ));
        }
        for s in &self.benchmark.scenarios {
            if !crate::scenarios::SCENARIO_NAMES.contains(&s.as_str()) {
                return Err(ConfigError::Invalid(format!(
                    "[benchmark] unknown scenario `{s}` (expected one of {:?})",
                    crate::scenarios::SCENARIO_NAMES
                )));
            }
        }
        let side = self.observation.0.rows;
        if self.observation.0.rows != self.observation.0.cols || self.train.sac.network.feature_side(side).is_none() {
            return Err(ConfigError::Invalid(format!(
                "[observation] {}×{} images do not fit the encoder",
                self.observation.0.rows, self.observation.0.cols
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = HarnessConfig::from_toml_str("").unwrap();
        assert_eq!(c, HarnessConfig::default());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = HarnessConfig::default();
        let back = HarnessConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = HarnessConfig::from_toml_str("[nav]\nwaypoint_spacing = 1.0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Schema(_)), "{err}");
        let err = HarnessConfig::from_toml_str("bogus = 3\n").unwrap_err();
        assert!(matches!(err, ConfigError::Schema(_)));
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut c = HarnessConfig::default();
        c.benchmark.scenarios = vec!["c9".into()];
        assert!(c.validate().is_err());
        let mut c = HarnessConfig::default();
        c.train.sac.gamma = 2.0;
        assert!(matches!(c.validate(), Err(ConfigError::Invalid(_))));
    }
}
