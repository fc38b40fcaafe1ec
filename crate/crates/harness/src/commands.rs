//! Subcommand implementations behind the `polarnav` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use polarnav_core::costmap::ObservationConfig;
use polarnav_core::par::Execution;
use polarnav_sac::{evaluate, train, AgentError, EvalRates, SacAgent, TrainError, TrainOptions, CHECKPOINT_DIR};

use crate::config::{ConfigError, HarnessConfig};
use crate::gradcheck::{run_suite, CheckResult};
use crate::render::render_svg;
use crate::report::{make_stack, run_benchmark, run_logged, BenchmarkReport, RunError};
use crate::scenarios::{curriculum_world, held_out_worlds, scenario, UnknownScenario};
use crate::stack::PlannerKind;

/// Observation settings saved next to a checkpoint.
pub const OBSERVATION_FILE: &str = "observation.json";
pub const EVAL_FILE: &str = "eval.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const LOG_DIR: &str = "logs";

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Scenario(#[from] UnknownScenario),
    #[error("checkpoint {path} expects {expected:?} observations but the configuration renders {found:?}")]
    ShapeMismatch {
        path: PathBuf,
        expected: (usize, usize, usize),
        found: (usize, usize, usize),
    },
    #[error("the sac planner needs --checkpoint")]
    MissingCheckpoint,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CommandError {
    /// Process exit code: 1 for usage and configuration problems.
    pub fn exit_code(&self) -> i32 {
        1
    }
}

fn execution(parallel: bool) -> Execution {
    if parallel {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

/// Loads a checkpoint and the observation settings it was trained with;
/// `fallback` applies when the checkpoint carries none.
pub fn load_agent(dir: &Path, fallback: ObservationConfig) -> Result<(Arc<SacAgent<f32>>, ObservationConfig), CommandError> {
    let agent = SacAgent::<f32>::load(dir)?;
    let obs_path = dir.join(OBSERVATION_FILE);
    let observation = if obs_path.exists() {
        serde_json::from_str(&fs::read_to_string(obs_path)?)?
    } else {
        fallback
    };
    if observation.shape() != agent.obs_shape() {
        return Err(CommandError::ShapeMismatch {
            path: dir.to_path_buf(),
            expected: agent.obs_shape(),
            found: observation.shape(),
        });
    }
    Ok((Arc::new(agent), observation))
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub episodes: usize,
    pub checkpoint: Option<PathBuf>,
    pub held_out: Option<EvalRates>,
}

/// Trains on the curriculum, saves the checkpoint with its observation
/// settings, and evaluates on held-out worlds.
pub fn train_command(config: &HarnessConfig, outdir: &Path) -> Result<TrainSummary, CommandError> {
    let t = &config.train;
    let observation = config.observation();
    let options = TrainOptions {
        episodes: t.episodes,
        seed: t.seed,
        observation,
        env: config.env,
        outdir: Some(outdir.to_path_buf()),
        checkpoint_every: (t.checkpoint_every_episodes > 0).then_some(t.checkpoint_every_episodes),
    };
    let seed = t.seed;
    let report = train(t.sac.clone(), &options, |ep| curriculum_world(seed, ep))?;
    let checkpoint = outdir.join(CHECKPOINT_DIR);
    fs::write(checkpoint.join(OBSERVATION_FILE), serde_json::to_string_pretty(&observation)?)?;
    let held_out = if t.eval_episodes > 0 {
        let worlds = held_out_worlds(t.eval_episodes);
        let (rates, _) = evaluate(&report.agent, &observation, &config.env, &worlds, execution(config.benchmark.parallel))?;
        fs::write(outdir.join(EVAL_FILE), serde_json::to_string_pretty(&rates)?)?;
        Some(rates)
    } else {
        None
    };
    Ok(TrainSummary {
        episodes: report.episodes.len(),
        checkpoint: Some(checkpoint),
        held_out,
    })
}

/// Held-out success and collision rates of a checkpoint.
pub fn evaluate_command(config: &HarnessConfig, checkpoint: &Path, episodes: usize) -> Result<EvalRates, CommandError> {
    let (agent, observation) = load_agent(checkpoint, config.observation())?;
    let worlds = held_out_worlds(episodes);
    let (rates, _) = evaluate(&agent, &observation, &config.env, &worlds, execution(config.benchmark.parallel))?;
    Ok(rates)
}

/// Runs the benchmark and writes the JSON and CSV reports plus one CSV
/// trajectory log per run.
pub fn benchmark_command(config: &HarnessConfig, outdir: &Path) -> Result<BenchmarkReport, CommandError> {
    let mut config = config.clone();
    let agent = match &config.benchmark.checkpoint {
        Some(dir) if config.benchmark.planners.contains(&PlannerKind::Sac) => {
            match load_agent(dir, config.observation()) {
                Ok((agent, observation)) => {
                    config.observation.0 = observation;
                    Some(agent)
                }
                Err(e) => {
                    log::warn!("sac checkpoint unavailable: {e}");
                    None
                }
            }
        }
        _ => None,
    };
    let (report, logs) = run_benchmark(&config, agent.as_ref(), execution(config.benchmark.parallel))?;
    fs::create_dir_all(outdir.join(LOG_DIR))?;
    report.write_json(outdir.join(REPORT_JSON))?;
    report.write_csv(outdir.join(REPORT_CSV))?;
    for log in &logs {
        log.write_csv(outdir.join(LOG_DIR).join(log.file_name())).map_err(RunError::from)?;
    }
    Ok(report)
}

/// Runs one episode and writes its SVG plot and CSV log; returns the SVG
/// path.
pub fn render_command(
    config: &HarnessConfig,
    scenario_name: &str,
    planner: PlannerKind,
    seed: u64,
    checkpoint: Option<&Path>,
    outdir: &Path,
) -> Result<PathBuf, CommandError> {
    let mut config = config.clone();
    let agent = match (planner, checkpoint) {
        (PlannerKind::Sac, Some(dir)) => {
            let (agent, observation) = load_agent(dir, config.observation())?;
            config.observation.0 = observation;
            Some(agent)
        }
        (PlannerKind::Sac, None) => return Err(CommandError::MissingCheckpoint),
        _ => None,
    };
    let spec = scenario(scenario_name, seed)?;
    let stack = make_stack(planner, &config, agent.as_ref()).ok_or(CommandError::MissingCheckpoint)?;
    let (log, _) = run_logged(&spec, stack, &config.env, planner.as_str())?;
    fs::create_dir_all(outdir)?;
    log.write_csv(outdir.join(log.file_name())).map_err(RunError::from)?;
    let svg = outdir.join(log.file_name().replace(".csv", ".svg"));
    fs::write(&svg, render_svg(&spec, &log, &config.env.action_bounds))?;
    Ok(svg)
}

pub fn gradcheck_command(seed: u64) -> Vec<CheckResult> {
    run_suite(seed)
}
