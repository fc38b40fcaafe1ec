use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use polarnav_core::costmap::{FrameStack, ObservationConfig};
use polarnav_core::gridworld::{EnvConfig, Environment, EpisodeError, EpisodeStatus, ScenarioSpec};
use polarnav_core::par::{map_slice, Execution};

use crate::agent::{ActMode, AgentError, SacAgent, UpdateStats};
use crate::config::SacConfig;
use crate::replay::{ReplayBuffer, Transition};
use crate::squash;

pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const CHECKPOINT_DIR: &str = "checkpoint";

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("episode setup failed: {0}")]
    Episode(#[from] EpisodeError),
    #[error("invalid options: {0}")]
    Options(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub episodes: usize,
    pub seed: u64,
    pub observation: ObservationConfig,
    pub env: EnvConfig,
    /// Training log and checkpoints go here when set.
    pub outdir: Option<PathBuf>,
    /// Writes `checkpoint_ep{N}` every this many episodes.
    pub checkpoint_every: Option<usize>,
}

/// One row of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub steps: usize,
    pub total_reward: f64,
    pub outcome: String,
    pub updates: u64,
    /// Means over the episode's updates; empty before learning starts.
    pub critic_loss: Option<f64>,
    pub actor_loss: Option<f64>,
    pub alpha_loss: Option<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub agent: SacAgent<f32>,
    pub episodes: Vec<EpisodeLog>,
}

#[derive(Default)]
struct LossMeans {
    critic: (f64, usize),
    actor: (f64, usize),
    alpha: (f64, usize),
}

impl LossMeans {
    fn add(&mut self, s: &UpdateStats) {
        self.critic.0 += s.critic_loss;
        self.critic.1 += 1;
        if let Some(a) = s.actor_loss {
            self.actor.0 += a;
            self.actor.1 += 1;
        }
        if let Some(a) = s.alpha_loss {
            self.alpha.0 += a;
            self.alpha.1 += 1;
        }
    }

    fn mean((sum, n): (f64, usize)) -> Option<f64> {
        (n > 0).then(|| sum / n as f64)
    }
}

/// Trains a fresh agent for `options.episodes` episodes on the worlds
/// produced by `worlds(episode_index)`.
///
/// The observation shows the environment's reward target (the scenario
/// goal) as the waypoint. The first `exploration_episodes` act uniformly at
/// random and perform no updates; afterwards every environment step is
/// followed by one update once the buffer holds a full batch.
pub fn train<W>(config: SacConfig, options: &TrainOptions, mut worlds: W) -> Result<TrainReport, TrainError>
where
    W: FnMut(usize) -> ScenarioSpec,
{
    options.observation.validate().map_err(TrainError::Options)?;
    options.env.validate().map_err(TrainError::Options)?;
    let obs_shape = options.observation.shape();
    let mut agent = SacAgent::<f32>::new(config.clone(), obs_shape, options.env.action_bounds, options.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    rng.set_stream(1);
    let mut buffer = ReplayBuffer::new(config.replay_capacity, obs_shape);
    let mut frames = FrameStack::new(options.observation.frame_stack);
    let mut logs = Vec::with_capacity(options.episodes);
    let mut writer = match &options.outdir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Some(csv::Writer::from_path(dir.join(TRAIN_LOG_FILE))?)
        }
        None => None,
    };

    for episode in 0..options.episodes {
        let explore = episode < config.exploration_episodes;
        let mut env = Environment::new(worlds(episode), options.env)?;
        frames.clear();
        let render = |env: &Environment| options.observation.render(env.costmap(), &env.robot(), &env.reward_target());
        let mut obs = frames.push(render(&env));
        let mut means = LossMeans::default();
        let status = loop {
            let a = if explore {
                [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)]
            } else {
                agent.act_normalized(&obs, ActMode::Sample, &mut rng)?
            };
            let result = env.step(squash::to_env(a, &options.env.action_bounds));
            let next = frames.push(render(&env));
            buffer.push(&Transition {
                obs,
                action: a,
                reward: result.reward,
                next_obs: next.clone(),
                done: result.terminal(),
            });
            obs = next;
            if !explore && buffer.len() >= config.batch_size {
                let batch = buffer.sample(config.batch_size, &mut rng);
                means.add(&agent.update(&batch, &mut rng)?);
            }
            if let Some(status) = result.status {
                break status;
            }
        };
        let row = EpisodeLog {
            episode,
            steps: env.steps(),
            total_reward: env.total_reward(),
            outcome: status.as_str().to_string(),
            updates: agent.updates(),
            critic_loss: LossMeans::mean(means.critic),
            actor_loss: LossMeans::mean(means.actor),
            alpha_loss: LossMeans::mean(means.alpha),
            alpha: agent.alpha(),
        };
        if episode % 50 == 0 || episode + 1 == options.episodes {
            info!(
                "episode {episode}: {} in {} steps, return {:.2}, alpha {:.4}",
                row.outcome, row.steps, row.total_reward, row.alpha
            );
        }
        if let Some(w) = writer.as_mut() {
            w.serialize(&row)?;
            w.flush()?;
        }
        logs.push(row);
        if let (Some(dir), Some(every)) = (&options.outdir, options.checkpoint_every) {
            if every > 0 && (episode + 1) % every == 0 {
                agent.save(dir.join(format!("checkpoint_ep{}", episode + 1)))?;
            }
        }
    }
    if let Some(mut w) = writer {
        w.flush()?;
    }
    if let Some(dir) = &options.outdir {
        agent.save(dir.join(CHECKPOINT_DIR))?;
    }
    Ok(TrainReport { agent, episodes: logs })
}

/// Outcome rates over a set of episodes; timeouts are the remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRates {
    pub episodes: usize,
    pub success: f64,
    pub collision: f64,
    pub timeout: f64,
}

impl EvalRates {
    pub fn from_outcomes(outcomes: &[EpisodeStatus]) -> Self {
        let n = outcomes.len();
        let rate = |s: EpisodeStatus| {
            if n == 0 {
                0.0
            } else {
                outcomes.iter().filter(|&&o| o == s).count() as f64 / n as f64
            }
        };
        EvalRates {
            episodes: n,
            success: rate(EpisodeStatus::Success),
            collision: rate(EpisodeStatus::Collision),
            timeout: rate(EpisodeStatus::Timeout),
        }
    }
}

/// Runs one deterministic-mode episode and reports how it ended.
pub fn rollout(
    agent: &SacAgent<f32>,
    observation: &ObservationConfig,
    env_config: &EnvConfig,
    world: &ScenarioSpec,
) -> Result<EpisodeStatus, TrainError> {
    let mut env = Environment::new(world.clone(), *env_config)?;
    let mut frames = FrameStack::new(observation.frame_stack);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    loop {
        let obs = frames.push(observation.render(env.costmap(), &env.robot(), &env.reward_target()));
        let action = agent.act(&obs, ActMode::Deterministic, &mut rng)?;
        if let Some(status) = env.step(action).status {
            return Ok(status);
        }
    }
}

/// Deterministic-mode rates over `worlds`, one episode each.
pub fn evaluate(
    agent: &SacAgent<f32>,
    observation: &ObservationConfig,
    env_config: &EnvConfig,
    worlds: &[ScenarioSpec],
    exec: Execution,
) -> Result<(EvalRates, Vec<EpisodeStatus>), TrainError> {
    let outcomes = map_slice(worlds, exec, |w| rollout(agent, observation, env_config, w))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok((EvalRates::from_outcomes(&outcomes), outcomes))
}

/// Reads a training log written by [`train`].
pub fn read_train_log(path: impl AsRef<Path>) -> Result<Vec<EpisodeLog>, TrainError> {
    let mut reader = csv::Reader::from_path(path)?;
    Ok(reader.deserialize().collect::<Result<Vec<_>, _>>()?)
}
