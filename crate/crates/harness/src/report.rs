//! Benchmark runner: every (scenario, planner) cell over seeded runs, with
//! per-run trajectory logs and aggregated JSON/CSV reports.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use polarnav_core::gridworld::{EnvConfig, Environment, EpisodeError, EpisodeStatus, Policy, PolicyError, ScenarioSpec};
use polarnav_core::par::{map_slice, Execution};
use polarnav_sac::{SacAgent, SacPlanner};

use crate::config::HarnessConfig;
use crate::metrics::{min_front_obstacle_dist, EpisodeMetrics, LogRow, TrajectoryLog};
use crate::scenarios::{scenario, UnknownScenario};
use crate::stack::{LocalPlanner, NavigationStack, PlannerKind};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] UnknownScenario),
    #[error(transparent)]
    Episode(#[from] EpisodeError),
    #[error("policy failed at step {step}: {source}")]
    Policy { step: usize, source: PolicyError },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Runs one episode of `spec` under `policy`, logging every step.
pub fn run_logged<P: Policy>(
    spec: &ScenarioSpec,
    mut policy: P,
    env_config: &EnvConfig,
    planner: &str,
) -> Result<(TrajectoryLog, EpisodeMetrics), RunError> {
    let mut env = Environment::new(spec.clone(), *env_config)?;
    policy
        .reset(&env.context())
        .map_err(|source| RunError::Policy { step: 0, source })?;
    let mut rows = Vec::with_capacity(spec.max_steps + 1);
    let mut movers = Vec::with_capacity(spec.max_steps + 1);
    let status = loop {
        let ctx = env.context();
        let (t, robot) = (ctx.t, ctx.robot);
        let front = min_front_obstacle_dist(&robot, env.obstacles());
        let action = policy.act(&ctx).map_err(|source| RunError::Policy {
            step: env.steps(),
            source,
        })?;
        movers.push(env.movers().to_vec());
        let result = env.step(action);
        rows.push(LogRow {
            t_s: t,
            x_m: robot.x,
            y_m: robot.y,
            yaw_rad: robot.yaw,
            v_mps: result.action.v,
            omega_radps: result.action.omega,
            min_front_obstacle_dist_m: front,
            reward: result.reward,
            status: String::new(),
        });
        if let Some(status) = result.status {
            break status;
        }
    };
    let metrics = EpisodeMetrics::from_rows(&rows, status, env_config.dt_s);
    let end = env.robot();
    rows.push(LogRow {
        t_s: env.time(),
        x_m: end.x,
        y_m: end.y,
        yaw_rad: end.yaw,
        v_mps: 0.0,
        omega_radps: 0.0,
        min_front_obstacle_dist_m: min_front_obstacle_dist(&end, env.obstacles()),
        reward: 0.0,
        status: status.as_str().to_string(),
    });
    movers.push(env.movers().to_vec());
    let log = TrajectoryLog {
        scenario: spec.name.clone(),
        planner: planner.to_string(),
        seed: spec.seed,
        rows,
        movers,
        mover_radii_m: spec.moving_obstacles.iter().map(|m| m.radius_m).collect(),
    };
    Ok((log, metrics))
}

/// Builds the navigation stack for `kind`; `None` when it needs an agent
/// and none was given.
pub fn make_stack(kind: PlannerKind, config: &HarnessConfig, agent: Option<&Arc<SacAgent<f32>>>) -> Option<NavigationStack> {
    let local = match kind {
        PlannerKind::Sac => LocalPlanner::Sac(Box::new(SacPlanner::new(Arc::clone(agent?), config.observation()))),
        PlannerKind::Dwa => LocalPlanner::Dwa(config.dwa),
        PlannerKind::Sp => LocalPlanner::Sp(config.sp),
    };
    Some(NavigationStack::new(local, config.nav))
}

/// One benchmark episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub planner: PlannerKind,
    pub seed: u64,
    pub status: EpisodeStatus,
    pub steps: usize,
    pub travel_time_s: f64,
    pub travel_distance_m: f64,
    pub mean_speed_mps: f64,
    pub total_reward: f64,
}

/// Aggregates of one (scenario, planner) cell. Travel figures average the
/// runs that did not collide and are absent when every run collided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub scenario: String,
    pub planner: PlannerKind,
    pub available: bool,
    pub note: Option<String>,
    pub runs: usize,
    pub success_rate: f64,
    pub collision_rate: f64,
    pub timeout_rate: f64,
    pub mean_travel_time_s: Option<f64>,
    pub mean_travel_distance_m: Option<f64>,
    pub mean_speed_mps: Option<f64>,
}

impl CellSummary {
    fn unavailable(scenario: &str, planner: PlannerKind, note: &str) -> Self {
        CellSummary {
            scenario: scenario.to_string(),
            planner,
            available: false,
            note: Some(note.to_string()),
            runs: 0,
            success_rate: 0.0,
            collision_rate: 0.0,
            timeout_rate: 0.0,
            mean_travel_time_s: None,
            mean_travel_distance_m: None,
            mean_speed_mps: None,
        }
    }

    fn from_runs(scenario: &str, planner: PlannerKind, runs: &[RunRecord]) -> Self {
        let n = runs.len();
        let rate = |s: EpisodeStatus| runs.iter().filter(|r| r.status == s).count() as f64 / n.max(1) as f64;
        let kept: Vec<&RunRecord> = runs.iter().filter(|r| r.status != EpisodeStatus::Collision).collect();
        let mean = |f: fn(&RunRecord) -> f64| {
            (!kept.is_empty()).then(|| kept.iter().map(|r| f(r)).sum::<f64>() / kept.len() as f64)
        };
        CellSummary {
            scenario: scenario.to_string(),
            planner,
            available: true,
            note: None,
            runs: n,
            success_rate: rate(EpisodeStatus::Success),
            collision_rate: rate(EpisodeStatus::Collision),
            timeout_rate: rate(EpisodeStatus::Timeout),
            mean_travel_time_s: mean(|r| r.travel_time_s),
            mean_travel_distance_m: mean(|r| r.travel_distance_m),
            mean_speed_mps: mean(|r| r.mean_speed_mps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub cells: Vec<CellSummary>,
    pub runs: Vec<RunRecord>,
}

/// Flat CSV form of a cell; missing values are empty fields.
#[derive(Serialize)]
struct CellRow<'a> {
    scenario: &'a str,
    planner: &'a str,
    available: bool,
    runs: usize,
    success_rate: f64,
    collision_rate: f64,
    timeout_rate: f64,
    mean_travel_time_s: Option<f64>,
    mean_travel_distance_m: Option<f64>,
    mean_speed_mps: Option<f64>,
    note: &'a str,
}

impl BenchmarkReport {
    pub fn cell(&self, scenario: &str, planner: PlannerKind) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.scenario == scenario && c.planner == planner)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<(), RunError> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self, RunError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Writes the cell summaries as CSV.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), RunError> {
        let mut w = csv::Writer::from_path(path)?;
        for c in &self.cells {
            w.serialize(CellRow {
                scenario: &c.scenario,
                planner: c.planner.as_str(),
                available: c.available,
                runs: c.runs,
                success_rate: c.success_rate,
                collision_rate: c.collision_rate,
                timeout_rate: c.timeout_rate,
                mean_travel_time_s: c.mean_travel_time_s,
                mean_travel_distance_m: c.mean_travel_distance_m,
                mean_speed_mps: c.mean_speed_mps,
                note: c.note.as_deref().unwrap_or(""),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Job {
    scenario: String,
    planner: PlannerKind,
    seed: u64,
}

/// Runs every configured cell. A SAC cell without an agent is reported as
/// unavailable. Results do not depend on `exec`.
pub fn run_benchmark(
    config: &HarnessConfig,
    agent: Option<&Arc<SacAgent<f32>>>,
    exec: Execution,
) -> Result<(BenchmarkReport, Vec<TrajectoryLog>), RunError> {
    let bench = &config.benchmark;
    let mut jobs = Vec::new();
    for s in &bench.scenarios {
        for &p in &bench.planners {
            if p == PlannerKind::Sac && agent.is_none() {
                continue;
            }
            jobs.extend((0..bench.runs_per_cell as u64).map(|i| Job {
                scenario: s.clone(),
                planner: p,
                seed: bench.base_seed + i,
            }));
        }
    }
    let results = map_slice(&jobs, exec, |job| -> Result<(RunRecord, TrajectoryLog), RunError> {
        let spec = scenario(&job.scenario, job.seed)?;
        let stack = make_stack(job.planner, config, agent).expect("agent checked above");
        let (log, m) = run_logged(&spec, stack, &config.env, job.planner.as_str())?;
        let total_reward = log.rows.iter().map(|r| r.reward).sum();
        let record = RunRecord {
            scenario: job.scenario.clone(),
            planner: job.planner,
            seed: job.seed,
            status: m.status,
            steps: m.steps,
            travel_time_s: m.travel_time_s,
            travel_distance_m: m.travel_distance_m,
            mean_speed_mps: m.mean_speed_mps,
            total_reward,
        };
        Ok((record, log))
    });
    let mut runs = Vec::with_capacity(jobs.len());
    let mut logs = Vec::with_capacity(jobs.len());
    for r in results {
        let (record, log) = r?;
        runs.push(record);
        logs.push(log);
    }
    let mut cells = Vec::new();
    for s in &bench.scenarios {
        for &p in &bench.planners {
            if p == PlannerKind::Sac && agent.is_none() {
                cells.push(CellSummary::unavailable(s, p, "no SAC checkpoint available"));
                continue;
            }
            let cell_runs: Vec<RunRecord> =
                runs.iter().filter(|r| &r.scenario == s && r.planner == p).cloned().collect();
            cells.push(CellSummary::from_runs(s, p, &cell_runs));
        }
    }
    Ok((BenchmarkReport { cells, runs }, logs))
}
