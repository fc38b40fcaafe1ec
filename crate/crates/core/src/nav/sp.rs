use serde::{Deserialize, Serialize};

use crate::geometry::{Action, Point, RobotState};
use crate::grid::OccupancyGrid;

use super::global::{plan_global, GlobalPlannerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpConfig {
    pub lookahead_m: f64,
    pub k_omega: f64,
    pub v_max_mps: f64,
    pub omega_max_radps: f64,
    pub planner: GlobalPlannerConfig,
}

impl Default for SpConfig {
    fn default() -> Self {
        SpConfig {
            lookahead_m: 0.6,
            k_omega: 2.0,
            v_max_mps: 1.0,
            omega_max_radps: 1.5,
            planner: GlobalPlannerConfig::default(),
        }
    }
}

/// Point at arc length `s` along a polyline; the last point when the
/// polyline is shorter.
fn point_along(points: &[Point], s: f64) -> Point {
    let mut remaining = s;
    for w in points.windows(2) {
        let len = w[0].distance(&w[1]);
        if remaining <= len && len > 0.0 {
            let f = remaining / len;
            return Point::new(w[0].x + f * (w[1].x - w[0].x), w[0].y + f * (w[1].y - w[0].y));
        }
        remaining -= len;
    }
    *points.last().expect("non-empty path")
}

/// Shortest-path follower: replans from the robot's cell to the waypoint on
/// `grid`, then steers toward the path point `lookahead_m` ahead with a
/// turn-then-move law. Never reverses. Stops when no path exists.
pub fn sp_plan(robot: &RobotState, waypoint: &Point, grid: &OccupancyGrid, config: &SpConfig) -> Action {
    let Ok(plan) = plan_global(grid, &robot.position(), waypoint, &config.planner) else {
        return Action::STOP;
    };
    let target = if plan.points.len() == 1 {
        *waypoint
    } else {
        point_along(&plan.points, config.lookahead_m)
    };
    if target.distance(&robot.position()) < 1e-9 {
        return Action::STOP;
    }
    let bearing = robot.bearing_to(&target);
    let omega = (config.k_omega * bearing).clamp(-config.omega_max_radps, config.omega_max_radps);
    let v = config.v_max_mps * bearing.cos().max(0.0);
    Action::new(v, omega)
}
