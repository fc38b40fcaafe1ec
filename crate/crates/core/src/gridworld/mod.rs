//! The deterministic "dummy" navigation environment.

mod env;
mod kinematics;
mod scenario;

pub use env::{
    run_episode, ConstantPolicy, EnvConfig, Environment, EpisodeError, EpisodeOutcome,
    EpisodeStatus, FnPolicy, Policy, PolicyContext, PolicyError, StepResult, TrajectoryStep,
};
pub use kinematics::{check_collision, raycast, step};
pub use scenario::{
    advance_moving_obstacles, MovingObstacle, PointSpec, PoseSpec, ScenarioError, ScenarioSpec,
    StaticObstacle,
};
