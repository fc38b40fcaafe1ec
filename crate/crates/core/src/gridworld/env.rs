use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::kinematics::{check_collision, step};
use super::scenario::{ScenarioError, ScenarioSpec};
use crate::costmap::{inflate, rasterize_at, InflationParams};
use crate::geometry::{Action, ActionBounds, Point, RobotState};
use crate::grid::OccupancyGrid;
use crate::reward::{transition_reward, RewardParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub dt_s: f64,
    pub footprint_radius_m: f64,
    pub action_bounds: ActionBounds,
    pub reward: RewardParams,
    pub inflation: InflationParams,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            dt_s: 0.2,
            footprint_radius_m: 0.25,
            action_bounds: ActionBounds::default(),
            reward: RewardParams::default(),
            inflation: InflationParams::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            return Err(format!("dt_s must be positive, got {}", self.dt_s));
        }
        if !(self.footprint_radius_m >= 0.0) {
            return Err(format!(
                "footprint_radius_m must be non-negative, got {}",
                self.footprint_radius_m
            ));
        }
        self.action_bounds.validate()?;
        self.reward.validate()?;
        self.inflation.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EpisodeStatus {
    Success,
    Collision,
    Timeout,
}

impl EpisodeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            EpisodeStatus::Success => "success",
            EpisodeStatus::Collision => "collision",
            EpisodeStatus::Timeout => "timeout",
        }
    }
}

/// One executed control step: the state the action was applied in, the
/// (clamped) action, and the resulting reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub t: f64,
    pub state: RobotState,
    pub action: Action,
    pub reward: f64,
    pub movers: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub status: EpisodeStatus,
    pub steps: usize,
    pub total_reward: f64,
    pub final_state: RobotState,
    pub trajectory: Vec<TrajectoryStep>,
}

#[derive(Debug, Error)]
#[error("{0}")]
pub struct PolicyError(pub String);

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("invalid environment config: {0}")]
    Config(String),
    #[error("policy failed at step {step}: {source}")]
    Policy {
        step: usize,
        source: PolicyError,
        trajectory: Vec<TrajectoryStep>,
    },
}

/// What a policy sees each step.
#[derive(Debug, Clone, Copy)]
pub struct PolicyContext<'a> {
    pub t: f64,
    pub step: usize,
    pub robot: RobotState,
    /// Last executed command; zero at the start of an episode.
    pub velocity: Action,
    pub goal: Point,
    /// Raw lethal map including moving obstacles.
    pub obstacles: &'a OccupancyGrid,
    /// Inflated costmap.
    pub costmap: &'a OccupancyGrid,
    pub spec: &'a ScenarioSpec,
    pub config: &'a EnvConfig,
}

pub trait Policy {
    /// Called once before the first step of an episode.
    fn reset(&mut self, _ctx: &PolicyContext<'_>) -> Result<(), PolicyError> {
        Ok(())
    }

    fn act(&mut self, ctx: &PolicyContext<'_>) -> Result<Action, PolicyError>;
}

impl<P: Policy + ?Sized> Policy for &mut P {
    fn reset(&mut self, ctx: &PolicyContext<'_>) -> Result<(), PolicyError> {
        (**self).reset(ctx)
    }

    fn act(&mut self, ctx: &PolicyContext<'_>) -> Result<Action, PolicyError> {
        (**self).act(ctx)
    }
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn reset(&mut self, ctx: &PolicyContext<'_>) -> Result<(), PolicyError> {
        (**self).reset(ctx)
    }

    fn act(&mut self, ctx: &PolicyContext<'_>) -> Result<Action, PolicyError> {
        (**self).act(ctx)
    }
}

/// Always issues the same command.
#[derive(Debug, Clone, Copy)]
pub struct ConstantPolicy(pub Action);

impl Policy for ConstantPolicy {
    fn act(&mut self, _ctx: &PolicyContext<'_>) -> Result<Action, PolicyError> {
        Ok(self.0)
    }
}

/// Adapts a closure into a policy.
pub struct FnPolicy<F>(pub F);

impl<F> Policy for FnPolicy<F>
where
    F: FnMut(&PolicyContext<'_>) -> Result<Action, PolicyError>,
{
    fn act(&mut self, ctx: &PolicyContext<'_>) -> Result<Action, PolicyError> {
        (self.0)(ctx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub action: Action,
    pub reward: f64,
    pub collided: bool,
    /// Set once the episode has ended.
    pub status: Option<EpisodeStatus>,
}

impl StepResult {
    /// Terminal for bootstrapping purposes: goal or collision, not timeout.
    pub fn terminal(&self) -> bool {
        matches!(
            self.status,
            Some(EpisodeStatus::Success | EpisodeStatus::Collision)
        )
    }

    pub fn done(&self) -> bool {
        self.status.is_some()
    }
}

/// A single running episode. Moving obstacles follow their schedules except
/// that a mover with `halt_within_m` freezes permanently the first time its
/// center comes within that distance of the robot.
#[derive(Debug, Clone)]
pub struct Environment {
    spec: ScenarioSpec,
    config: EnvConfig,
    robot: RobotState,
    velocity: Action,
    steps: usize,
    total_reward: f64,
    status: Option<EpisodeStatus>,
    halted: Vec<Option<Point>>,
    movers: Vec<Point>,
    obstacles: OccupancyGrid,
    costmap: OccupancyGrid,
    reward_target: Point,
}

impl Environment {
    pub fn new(spec: ScenarioSpec, config: EnvConfig) -> Result<Self, EpisodeError> {
        spec.validate()?;
        config.validate().map_err(EpisodeError::Config)?;
        let goal = spec.goal_point();
        let mut env = Environment {
            robot: spec.start_state(),
            velocity: Action::STOP,
            steps: 0,
            total_reward: 0.0,
            status: None,
            halted: vec![None; spec.moving_obstacles.len()],
            movers: Vec::new(),
            obstacles: OccupancyGrid::new(1, 1, 1.0, Point::default()),
            costmap: OccupancyGrid::new(1, 1, 1.0, Point::default()),
            reward_target: goal,
            spec,
            config,
        };
        env.reset();
        Ok(env)
    }

    pub fn reset(&mut self) {
        self.robot = self.spec.start_state();
        self.velocity = Action::STOP;
        self.steps = 0;
        self.total_reward = 0.0;
        self.status = None;
        self.halted.iter_mut().for_each(|h| *h = None);
        self.reward_target = self.spec.goal_point();
        self.update_movers(0.0);
        self.rebuild_maps(0.0);
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.config.dt_s
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn robot(&self) -> RobotState {
        self.robot
    }

    pub fn velocity(&self) -> Action {
        self.velocity
    }

    pub fn goal(&self) -> Point {
        self.spec.goal_point()
    }

    pub fn movers(&self) -> &[Point] {
        &self.movers
    }

    pub fn obstacles(&self) -> &OccupancyGrid {
        &self.obstacles
    }

    pub fn costmap(&self) -> &OccupancyGrid {
        &self.costmap
    }

    pub fn status(&self) -> Option<EpisodeStatus> {
        self.status
    }

    pub fn total_reward(&self) -> f64 {
        self.total_reward
    }

    /// Point the shaped reward measures progress toward. Defaults to the goal.
    pub fn reward_target(&self) -> Point {
        self.reward_target
    }

    pub fn set_reward_target(&mut self, target: Point) {
        self.reward_target = target;
    }

    pub fn context(&self) -> PolicyContext<'_> {
        PolicyContext {
            t: self.time(),
            step: self.steps,
            robot: self.robot,
            velocity: self.velocity,
            goal: self.goal(),
            obstacles: &self.obstacles,
            costmap: &self.costmap,
            spec: &self.spec,
            config: &self.config,
        }
    }

    /// Applies `action` (clamped to the bounds) for one timestep.
    ///
    /// # Panics
    /// When called after the episode has ended.
    pub fn step(&mut self, action: Action) -> StepResult {
        assert!(self.status.is_none(), "step called on a finished episode");
        let (action, _) = self.config.action_bounds.clamp(action);
        let t_prev = self.time();
        let before = self.robot;
        self.robot = step(&before, &action, self.config.dt_s);
        self.velocity = action;
        self.steps += 1;
        let t = self.time();

        let had_movers = !self.movers.is_empty();
        self.update_movers(t);
        if had_movers || self.appearance_between(t_prev, t) {
            self.rebuild_maps(t);
        }

        let collided = check_collision(&self.robot, &self.obstacles, self.config.footprint_radius_m);
        let (reward, _) = transition_reward(
            &before,
            &self.robot,
            &self.reward_target,
            &self.costmap,
            collided,
            &self.config.reward,
        );
        self.total_reward += reward;

        let goal_dist = self.robot.position().distance(&self.goal());
        self.status = if collided {
            Some(EpisodeStatus::Collision)
        } else if goal_dist <= self.config.reward.goal_tolerance_m {
            Some(EpisodeStatus::Success)
        } else if self.steps >= self.spec.max_steps {
            Some(EpisodeStatus::Timeout)
        } else {
            None
        };
        StepResult {
            action,
            reward,
            collided,
            status: self.status,
        }
    }

    fn update_movers(&mut self, t: f64) {
        let robot = self.robot.position();
        self.movers = self
            .spec
            .moving_obstacles
            .iter()
            .zip(self.halted.iter_mut())
            .map(|(m, halted)| {
                if let Some(p) = *halted {
                    return p;
                }
                let p = m.position_at(t);
                if let Some(r) = m.halt_within_m {
                    if p.distance(&robot) <= r {
                        *halted = Some(p);
                    }
                }
                p
            })
            .collect();
    }

    fn appearance_between(&self, t_prev: f64, t: f64) -> bool {
        self.spec
            .static_obstacles
            .iter()
            .any(|o| o.appear_s() > t_prev && o.appear_s() <= t)
    }

    fn rebuild_maps(&mut self, t: f64) {
        self.obstacles = rasterize_at(&self.spec, t, &self.movers);
        self.costmap = inflate(&self.obstacles, &self.config.inflation);
    }
}

/// Runs one episode from the scenario's start until it ends.
pub fn run_episode<P: Policy>(
    spec: &ScenarioSpec,
    mut policy: P,
    config: &EnvConfig,
) -> Result<EpisodeOutcome, EpisodeError> {
    let mut env = Environment::new(spec.clone(), *config)?;
    let mut trajectory = Vec::with_capacity(spec.max_steps);
    if let Err(source) = policy.reset(&env.context()) {
        return Err(EpisodeError::Policy {
            step: 0,
            source,
            trajectory,
        });
    }
    loop {
        let ctx = env.context();
        let (t, state, movers) = (ctx.t, ctx.robot, env.movers().to_vec());
        let action = match policy.act(&ctx) {
            Ok(a) => a,
            Err(source) => {
                return Err(EpisodeError::Policy {
                    step: env.steps(),
                    source,
                    trajectory,
                })
            }
        };
        let result = env.step(action);
        trajectory.push(TrajectoryStep {
            t,
            state,
            action: result.action,
            reward: result.reward,
            movers,
        });
        if let Some(status) = result.status {
            return Ok(EpisodeOutcome {
                status,
                steps: env.steps(),
                total_reward: env.total_reward(),
                final_state: env.robot(),
                trajectory,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{MovingObstacle, PointSpec, PoseSpec, StaticObstacle};

    fn corridor() -> ScenarioSpec {
        let mut s = ScenarioSpec::open("corridor", 6.0, 3.0, 0.1);
        s.start = PoseSpec { x_m: 0.5, y_m: 1.5, yaw_rad: 0.0 };
        s.goal = PointSpec { x_m: 5.0, y_m: 1.5 };
        s.max_steps = 50;
        s
    }

    #[test]
    fn drive_straight_reaches_goal() {
        let spec = corridor();
        let cfg = EnvConfig::default();
        let out = run_episode(&spec, ConstantPolicy(Action::new(0.5, 0.0)), &cfg).unwrap();
        assert_eq!(out.status, EpisodeStatus::Success);
        // independent replay of the kinematics
        let mut s = spec.start_state();
        let mut n = 0;
        while s.position().distance(&spec.goal_point()) > cfg.reward.goal_tolerance_m {
            s = step(&s, &Action::new(0.5, 0.0), cfg.dt_s);
            n += 1;
        }
        assert_eq!(out.steps, n);
        assert_eq!(out.final_state, s);
        let total: f64 = out.trajectory.iter().map(|s| s.reward).sum();
        assert_eq!(total, out.total_reward);
    }

    #[test]
    fn full_speed_into_wall_collides() {
        let mut spec = corridor();
        spec.static_obstacles
            .push(StaticObstacle::rect(Point::new(2.5, 0.0), Point::new(2.8, 3.0)));
        let out = run_episode(&spec, ConstantPolicy(Action::new(1.0, 0.0)), &EnvConfig::default())
            .unwrap();
        assert_eq!(out.status, EpisodeStatus::Collision);
        assert!(out.final_state.x < 2.6);
        assert!(out.trajectory.last().unwrap().reward < -5.0);
    }

    #[test]
    fn stand_still_times_out() {
        let spec = corridor();
        let out = run_episode(&spec, ConstantPolicy(Action::STOP), &EnvConfig::default()).unwrap();
        assert_eq!(out.status, EpisodeStatus::Timeout);
        assert_eq!(out.steps, spec.max_steps);
    }

    #[test]
    fn actions_are_clamped() {
        let spec = corridor();
        let out = run_episode(&spec, ConstantPolicy(Action::new(5.0, -9.0)), &EnvConfig::default())
            .unwrap();
        assert_eq!(out.trajectory[0].action, Action::new(1.0, -1.5));
    }

    #[test]
    fn policy_failure_is_distinguished() {
        let spec = corridor();
        let policy = FnPolicy(|ctx: &PolicyContext<'_>| {
            if ctx.step == 3 {
                Err(PolicyError("boom".into()))
            } else {
                Ok(Action::STOP)
            }
        });
        match run_episode(&spec, policy, &EnvConfig::default()) {
            Err(EpisodeError::Policy { step, trajectory, .. }) => {
                assert_eq!(step, 3);
                assert_eq!(trajectory.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn halting_mover_freezes() {
        let mut spec = corridor();
        spec.moving_obstacles.push(MovingObstacle {
            radius_m: 0.2,
            depart_s: 0.0,
            waypoints: vec![PointSpec { x_m: 5.5, y_m: 1.5 }, PointSpec { x_m: 0.3, y_m: 1.5 }],
            segment_speeds_mps: vec![1.0],
            halt_within_m: Some(1.0),
        });
        let out = run_episode(&spec, ConstantPolicy(Action::STOP), &EnvConfig::default()).unwrap();
        assert_eq!(out.status, EpisodeStatus::Timeout);
        let last = out.trajectory.last().unwrap().movers[0];
        assert!(last.x > 1.3 && last.x <= 1.5 + 1e-9, "{last:?}");
        let first_halt = out.trajectory.iter().position(|s| s.movers[0] == last).unwrap();
        assert!(out.trajectory[first_halt..].iter().all(|s| s.movers[0] == last));
    }

    #[test]
    fn appearing_obstacle_shows_up_in_maps() {
        let mut spec = corridor();
        spec.static_obstacles.push(
            StaticObstacle::rect(Point::new(3.0, 0.0), Point::new(3.2, 3.0)).appearing_at(1.0),
        );
        let mut env = Environment::new(spec, EnvConfig::default()).unwrap();
        assert_eq!(env.obstacles().lethal_count(), 0);
        for _ in 0..5 {
            env.step(Action::STOP);
        }
        assert!(env.obstacles().lethal_count() > 0);
        assert!(env.costmap().lethal_count() >= env.obstacles().lethal_count());
    }

    #[test]
    fn runs_are_bit_identical() {
        let mut spec = corridor();
        spec.static_obstacles
            .push(StaticObstacle::circle(Point::new(3.0, 1.2), 0.3));
        let policy = || {
            FnPolicy(|ctx: &PolicyContext<'_>| {
                Ok(Action::new(0.7, 0.3 * (ctx.t * 1.3).sin()))
            })
        };
        let a = run_episode(&spec, policy(), &EnvConfig::default()).unwrap();
        let b = run_episode(&spec, policy(), &EnvConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
