use serde::{Deserialize, Serialize};

/// Which image augmentation the learner uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Augmentation {
    /// Plain SAC on raw observations.
    None,
    /// One random shift for the current and one for the next observation.
    Rad,
    /// One random shift for the current observation; targets averaged over
    /// `drq_k` independently shifted next observations.
    Drq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Filters per conv layer; every kernel is 3×3.
    pub conv_filters: Vec<usize>,
    /// Stride per conv layer, same length as `conv_filters`.
    pub conv_strides: Vec<usize>,
    pub latent_dim: usize,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub log_std_min: f64,
    pub log_std_max: f64,
}

impl NetworkConfig {
    /// Four 3×3×32 stride-1 convs, 50-d latent, 4-layer MLPs of 1024 units.
    pub fn paper() -> Self {
        NetworkConfig {
            conv_filters: vec![32; 4],
            conv_strides: vec![1; 4],
            latent_dim: 50,
            actor_hidden: vec![1024; 3],
            critic_hidden: vec![1024; 3],
            log_std_min: -10.0,
            log_std_max: 2.0,
        }
    }

    /// Reduced networks that train on one CPU core: two convs of 16
    /// filters (the first with stride 2), 32-d latent, MLPs of 2×256.
    pub fn desk() -> Self {
        NetworkConfig {
            conv_filters: vec![16, 16],
            conv_strides: vec![2, 2],
            latent_dim: 32,
            actor_hidden: vec![256, 256],
            critic_hidden: vec![256, 256],
            log_std_min: -10.0,
            log_std_max: 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.conv_filters.is_empty() || self.conv_filters.len() != self.conv_strides.len() {
            return Err("conv_filters and conv_strides must be non-empty and equally long".into());
        }
        if self.conv_strides.contains(&0) || self.conv_filters.contains(&0) {
            return Err("conv filters and strides must be positive".into());
        }
        if self.latent_dim == 0 {
            return Err("latent_dim must be positive".into());
        }
        if !(self.log_std_min < self.log_std_max) {
            return Err("log_std_min must be below log_std_max".into());
        }
        Ok(())
    }

    /// Spatial side of the final conv feature map for a square input.
    pub fn feature_side(&self, input: usize) -> Option<usize> {
        let mut side = input;
        for &s in &self.conv_strides {
            if side < 3 {
                return None;
            }
            side = (side - 3) / s + 1;
        }
        Some(side)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SacConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub tau: f64,
    pub target_update_every: usize,
    pub actor_update_every: usize,
    pub exploration_episodes: usize,
    pub augmentation: Augmentation,
    pub drq_k: usize,
    pub rad_shift_px: usize,
    pub target_entropy: f64,
    pub initial_temperature: f64,
    pub network: NetworkConfig,
}

impl SacConfig {
    /// Full-size hyper-parameters.
    pub fn paper() -> Self {
        SacConfig {
            gamma: 0.99,
            learning_rate: 1e-3,
            batch_size: 128,
            replay_capacity: 1_000_000,
            tau: 0.01,
            target_update_every: 2,
            actor_update_every: 2,
            exploration_episodes: 10,
            augmentation: Augmentation::Drq,
            drq_k: 2,
            rad_shift_px: 4,
            target_entropy: -2.0,
            initial_temperature: 0.1,
            network: NetworkConfig::paper(),
        }
    }

    /// Reduced networks and batch for single-core training.
    pub fn desk() -> Self {
        SacConfig {
            batch_size: 32,
            replay_capacity: 100_000,
            network: NetworkConfig::desk(),
            ..Self::paper()
        }
    }

    /// Number of augmented next observations averaged in the target.
    pub fn target_augmentations(&self) -> usize {
        match self.augmentation {
            Augmentation::Drq => self.drq_k,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.drq_k == 0 {
            return Err("drq_k must be at least 1".into());
        }
        if self.batch_size == 0 || self.replay_capacity == 0 {
            return Err("batch_size and replay_capacity must be positive".into());
        }
        if self.target_update_every == 0 || self.actor_update_every == 0 {
            return Err("update frequencies must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.initial_temperature > 0.0) {
            return Err("learning_rate and initial_temperature must be positive".into());
        }
        self.network.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        SacConfig::paper().validate().unwrap();
        SacConfig::desk().validate().unwrap();
        assert_eq!(NetworkConfig::paper().feature_side(64), Some(56));
        assert_eq!(NetworkConfig::desk().feature_side(40), Some(9));
        assert_eq!(SacConfig::paper().target_augmentations(), 2);
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = SacConfig::desk();
        c.gamma = 0.0;
        assert!(c.validate().is_err());
        let mut c = SacConfig::desk();
        c.drq_k = 0;
        assert!(c.validate().is_err());
    }
}
