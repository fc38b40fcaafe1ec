use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use polarnav_autodiff::nn::Params;
use polarnav_autodiff::{
    load_checkpoint, save_checkpoint, Adam, AdamConfig, AutodiffError, CheckpointError, Graph, ParamId,
    ParamStore, Scalar, Tensor,
};
use polarnav_core::costmap::ObsImage;
use polarnav_core::{Action, ActionBounds};

use crate::augment::rad_shift_batch;
use crate::config::{Augmentation, SacConfig};
use crate::losses::{actor_loss, alpha_loss, critic_loss, critic_targets, TargetBatch};
use crate::networks::{Networks, ACTION_DIM};
use crate::replay::Batch;
use crate::squash;

pub const AGENT_FILE: &str = "agent.json";

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training diverged at update {update}: {what} is not finite")]
    Diverged { update: u64, what: &'static str },
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad agent description: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActMode {
    Sample,
    /// `a = tanh(μ)`.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: Option<f64>,
    pub alpha_loss: Option<f64>,
    pub alpha: f64,
}

/// What a checkpoint directory records next to the parameter blob.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDescription {
    pub config: SacConfig,
    pub obs_shape: (usize, usize, usize),
    pub bounds: ActionBounds,
}

/// SAC learner and actor. `T` is the float type of every tensor.
#[derive(Debug, Clone)]
pub struct SacAgent<T: Scalar = f32> {
    config: SacConfig,
    obs_shape: (usize, usize, usize),
    bounds: ActionBounds,
    log_half_sum: f64,
    nets: Networks,
    online: ParamStore<T>,
    target: ParamStore<T>,
    critic_ids: Vec<ParamId>,
    critic_opt: Adam<T>,
    actor_opt: Adam<T>,
    alpha_opt: Adam<T>,
    updates: u64,
}

fn tensor_from_f32<T: Scalar>(shape: &[usize], data: &[f32]) -> Tensor<T> {
    Tensor::new(shape.to_vec(), data.iter().map(|&v| T::from_f64(v as f64)).collect())
}

fn normal_noise<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Tensor<T> {
    let data = (0..n * ACTION_DIM)
        .map(|_| T::from_f64(rng.sample::<f64, _>(StandardNormal)))
        .collect();
    Tensor::new([n, ACTION_DIM], data)
}

impl<T: Scalar> SacAgent<T> {
    /// Fresh networks with weights drawn from `seed`.
    pub fn new(
        config: SacConfig,
        obs_shape: (usize, usize, usize),
        bounds: ActionBounds,
        seed: u64,
    ) -> Result<Self, AgentError> {
        config.validate().map_err(AgentError::Config)?;
        bounds.validate().map_err(AgentError::Config)?;
        if obs_shape.1 != obs_shape.2 || config.network.feature_side(obs_shape.1).is_none() {
            return Err(AgentError::Config(format!(
                "observation shape {obs_shape:?} does not fit the encoder"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut online = ParamStore::new();
        let nets = Networks::new(&mut online, obs_shape, &config.network, config.initial_temperature, &mut rng);
        let half = squash::half_widths(&bounds);
        let adam = AdamConfig {
            lr: config.learning_rate,
            ..AdamConfig::default()
        };
        Ok(SacAgent {
            log_half_sum: half[0].ln() + half[1].ln(),
            critic_ids: nets.critic_ids(),
            target: online.clone(),
            online,
            nets,
            config,
            obs_shape,
            bounds,
            critic_opt: Adam::new(adam),
            actor_opt: Adam::new(adam),
            alpha_opt: Adam::new(adam),
            updates: 0,
        })
    }

    pub fn config(&self) -> &SacConfig {
        &self.config
    }

    pub fn obs_shape(&self) -> (usize, usize, usize) {
        self.obs_shape
    }

    pub fn bounds(&self) -> &ActionBounds {
        &self.bounds
    }

    pub fn networks(&self) -> &Networks {
        &self.nets
    }

    pub fn params(&self) -> &ParamStore<T> {
        &self.online
    }

    pub fn target_params(&self) -> &ParamStore<T> {
        &self.target
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn alpha(&self) -> f64 {
        self.online.get(self.nets.log_alpha).data()[0].as_f64().exp()
    }

    /// Sum of the log half-widths of the action box.
    pub fn log_half_sum(&self) -> f64 {
        self.log_half_sum
    }

    /// Pre-squash `(μ, log σ)` for one observation.
    pub fn policy_params(&self, obs: &ObsImage) -> Result<([f64; 2], [f64; 2]), AgentError> {
        let (c, h, w) = self.obs_shape;
        let mut g = Graph::new();
        let p = Params::frozen(&self.online);
        let x = g.input(tensor_from_f32(&[1, c, h, w], &obs.data));
        let z = self.nets.encoder.forward(&mut g, &p, x)?;
        let (mu, ls) = self.nets.policy(&mut g, &p, z)?;
        let mu = g.value(mu).to_f64_vec();
        let ls = g.value(ls).to_f64_vec();
        Ok(([mu[0], mu[1]], [ls[0], ls[1]]))
    }

    /// Normalized action in `(-1, 1)²` for one observation.
    pub fn act_normalized<R: Rng + ?Sized>(
        &self,
        obs: &ObsImage,
        mode: ActMode,
        rng: &mut R,
    ) -> Result<[f64; 2], AgentError> {
        assert_eq!(obs.shape(), self.obs_shape, "observation shape mismatch");
        let (mu, ls) = self.policy_params(obs)?;
        let mut a = [0.0; 2];
        for i in 0..2 {
            let u = match mode {
                ActMode::Deterministic => mu[i],
                ActMode::Sample => mu[i] + ls[i].exp() * rng.sample::<f64, _>(StandardNormal),
            };
            a[i] = u.tanh();
        }
        Ok(a)
    }

    pub fn act<R: Rng + ?Sized>(&self, obs: &ObsImage, mode: ActMode, rng: &mut R) -> Result<Action, AgentError> {
        let a = self.act_normalized(obs, mode, rng)?;
        Ok(squash::to_env(a, &self.bounds))
    }

    fn views<R: Rng + ?Sized>(&self, batch: &Batch, rng: &mut R) -> (Tensor<T>, Vec<Tensor<T>>) {
        let (c, h, w) = self.obs_shape;
        let shape = [batch.size, c, h, w];
        let r = self.config.rad_shift_px;
        match self.config.augmentation {
            Augmentation::None => (
                tensor_from_f32(&shape, &batch.obs),
                vec![tensor_from_f32(&shape, &batch.next_obs)],
            ),
            Augmentation::Rad | Augmentation::Drq => {
                let obs = rad_shift_batch(&batch.obs, self.obs_shape, r, rng);
                let next = (0..self.config.target_augmentations())
                    .map(|_| tensor_from_f32(&shape, &rad_shift_batch(&batch.next_obs, self.obs_shape, r, rng)))
                    .collect();
                (tensor_from_f32(&shape, &obs), next)
            }
        }
    }

    /// One gradient step on the critic; actor and temperature every
    /// `actor_update_every` calls; target EMA every `target_update_every`.
    pub fn update<R: Rng + ?Sized>(&mut self, batch: &Batch, rng: &mut R) -> Result<UpdateStats, AgentError> {
        self.updates += 1;
        let n = batch.size;
        let (obs, next_views) = self.views(batch, rng);
        let noises = (0..next_views.len()).map(|_| normal_noise(n, rng)).collect();
        let rewards: Vec<T> = batch.rewards.iter().map(|&r| T::from_f64(r as f64)).collect();
        let dones: Vec<T> = batch.dones.iter().map(|&d| T::from_f64(d as f64)).collect();
        let alpha = self.alpha();
        let y = critic_targets(
            &self.nets,
            &self.online,
            &self.target,
            next_views,
            noises,
            &TargetBatch {
                rewards: &rewards,
                dones: &dones,
                gamma: self.config.gamma,
                alpha,
                log_half_sum: self.log_half_sum,
            },
        )?;

        let actions = tensor_from_f32(&[n, ACTION_DIM], &batch.actions);
        let mut g = Graph::new();
        let loss = critic_loss(
            &mut g,
            &self.nets,
            &Params::trainable(&self.online),
            obs.clone(),
            actions,
            Tensor::new([n, 1], y),
        )?;
        let critic_value = g.value(loss).data()[0].as_f64();
        if !critic_value.is_finite() {
            return Err(AgentError::Diverged {
                update: self.updates,
                what: "critic loss",
            });
        }
        let grads = g.backward(loss)?;
        drop(g);
        self.critic_opt.step(&mut self.online, &grads);

        let mut stats = UpdateStats {
            critic_loss: critic_value,
            actor_loss: None,
            alpha_loss: None,
            alpha,
        };

        if self.updates % self.config.actor_update_every as u64 == 0 {
            let noise = normal_noise(n, rng);
            let mut g = Graph::new();
            let al = actor_loss(&mut g, &self.nets, &self.online, obs, noise, alpha, self.log_half_sum)?;
            let actor_value = g.value(al.loss).data()[0].as_f64();
            if !actor_value.is_finite() {
                return Err(AgentError::Diverged {
                    update: self.updates,
                    what: "actor loss",
                });
            }
            let grads = g.backward(al.loss)?;
            let log_prob = g.value(al.log_prob).clone();
            drop(g);
            self.actor_opt.step(&mut self.online, &grads);

            let mut g = Graph::new();
            let loss = alpha_loss(
                &mut g,
                &self.nets,
                &Params::trainable(&self.online),
                &log_prob,
                self.config.target_entropy,
            )?;
            let alpha_value = g.value(loss).data()[0].as_f64();
            if !alpha_value.is_finite() {
                return Err(AgentError::Diverged {
                    update: self.updates,
                    what: "temperature loss",
                });
            }
            let grads = g.backward(loss)?;
            drop(g);
            self.alpha_opt.step(&mut self.online, &grads);
            stats.actor_loss = Some(actor_value);
            stats.alpha_loss = Some(alpha_value);
            stats.alpha = self.alpha();
        }

        if self.updates % self.config.target_update_every as u64 == 0 {
            self.target_sync(self.config.tau);
        }
        Ok(stats)
    }

    /// `φ̄ ← (1 − τ)·φ̄ + τ·φ` over the encoder and Q heads.
    pub fn target_sync(&mut self, tau: f64) {
        self.target.ema_from(&self.online, &self.critic_ids, T::from_f64(tau));
    }

    pub fn description(&self) -> AgentDescription {
        AgentDescription {
            config: self.config.clone(),
            obs_shape: self.obs_shape,
            bounds: self.bounds,
        }
    }

    /// Writes the online parameters (as f32) and the agent description.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), AgentError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        save_checkpoint(&self.online.cast::<f32>(), dir)?;
        let text = serde_json::to_string_pretty(&self.description())?;
        fs::write(dir.join(AGENT_FILE), text + "\n")?;
        Ok(())
    }

    /// Restores an agent written by [`SacAgent::save`]. Target networks
    /// start as copies of the online ones; optimizer state is fresh.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, AgentError> {
        let dir = dir.as_ref();
        let desc: AgentDescription = serde_json::from_str(&fs::read_to_string(dir.join(AGENT_FILE))?)?;
        let mut agent = Self::new(desc.config, desc.obs_shape, desc.bounds, 0)?;
        let stored = load_checkpoint(dir)?;
        if stored.len() != agent.online.len() {
            return Err(AgentError::Config(format!(
                "checkpoint holds {} tensors, the network has {}",
                stored.len(),
                agent.online.len()
            )));
        }
        for id in agent.online.ids().collect::<Vec<_>>() {
            let name = agent.online.name(id).to_string();
            let src = stored
                .id(&name)
                .map(|sid| stored.get(sid))
                .ok_or_else(|| AgentError::Config(format!("checkpoint lacks tensor `{name}`")))?;
            if src.shape() != agent.online.get(id).shape() {
                return Err(AgentError::Config(format!("tensor `{name}` has shape {:?}", src.shape())));
            }
            *agent.online.get_mut(id) = src.cast();
        }
        agent.target = agent.online.clone();
        Ok(agent)
    }
}
