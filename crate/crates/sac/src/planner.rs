use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use polarnav_core::costmap::{FrameStack, ObservationConfig};
use polarnav_core::gridworld::{Policy, PolicyContext, PolicyError};
use polarnav_core::{Action, OccupancyGrid, Point, RobotState};

use crate::agent::{ActMode, SacAgent};

/// Inference-time wrapper: renders the costmap around the robot with the
/// current waypoint, stacks frames, and returns the deterministic action.
#[derive(Debug, Clone)]
pub struct SacPlanner {
    agent: Arc<SacAgent<f32>>,
    observation: ObservationConfig,
    frames: FrameStack,
}

impl SacPlanner {
    /// # Panics
    /// When the observation shape does not match the agent's input.
    pub fn new(agent: Arc<SacAgent<f32>>, observation: ObservationConfig) -> Self {
        assert_eq!(observation.shape(), agent.obs_shape(), "observation does not match the agent");
        SacPlanner {
            frames: FrameStack::new(observation.frame_stack),
            agent,
            observation,
        }
    }

    pub fn agent(&self) -> &SacAgent<f32> {
        &self.agent
    }

    /// Clears the frame history.
    pub fn reset(&mut self) {
        self.frames.clear();
    }

    pub fn plan(&mut self, costmap: &OccupancyGrid, robot: &RobotState, waypoint: &Point) -> Result<Action, PolicyError> {
        let frame = self.observation.render(costmap, robot, waypoint);
        let obs = self.frames.push(frame);
        // deterministic mode draws no noise
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        self.agent
            .act(&obs, ActMode::Deterministic, &mut rng)
            .map_err(|e| PolicyError(e.to_string()))
    }
}

/// Steers straight at the episode goal.
impl Policy for SacPlanner {
    fn reset(&mut self, _ctx: &PolicyContext<'_>) -> Result<(), PolicyError> {
        SacPlanner::reset(self);
        Ok(())
    }

    fn act(&mut self, ctx: &PolicyContext<'_>) -> Result<Action, PolicyError> {
        self.plan(ctx.costmap, &ctx.robot, &ctx.goal)
    }
}
