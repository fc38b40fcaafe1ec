//! Shaped navigation reward.
//!
//! ```text
//! R = w_d·P(d_old, d_new) + w_θ·P(|θ_old|, |θ_new|)
//!     - R_max·[collision] + R_max·[d_new ≤ tol] - G(s')
//! ```
//! where `P(old, new) = (old - new)` for progress and `2·(old - new)` for
//! regress, and `G` is the kernel-weighted mean of normalized costmap values
//! in a truncated Gaussian window around the robot. A collision suppresses
//! the goal bonus.

use serde::{Deserialize, Serialize};

use crate::geometry::{Point, RobotState};
use crate::grid::{OccupancyGrid, LETHAL_COST};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardParams {
    pub r_max: f64,
    pub gaussian_sigma_m: f64,
    /// Half side of the square kernel support.
    pub gaussian_half_width_m: f64,
    pub goal_tolerance_m: f64,
    pub distance_weight: f64,
    pub bearing_weight: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            r_max: 10.0,
            gaussian_sigma_m: 0.5,
            gaussian_half_width_m: 1.0,
            goal_tolerance_m: 0.15,
            distance_weight: 1.0,
            bearing_weight: 1.0,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            self.r_max,
            self.gaussian_sigma_m,
            self.gaussian_half_width_m,
            self.goal_tolerance_m,
        ];
        if positive.iter().all(|v| *v > 0.0) && self.distance_weight >= 0.0 && self.bearing_weight >= 0.0
        {
            Ok(())
        } else {
            Err(format!("invalid reward parameters {self:?}"))
        }
    }
}

/// Distance and heading-relative bearing to the active waypoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaypointGeometry {
    pub distance: f64,
    pub bearing: f64,
}

impl WaypointGeometry {
    pub fn new(robot: &RobotState, waypoint: &Point) -> Self {
        Self {
            distance: robot.position().distance(waypoint),
            bearing: robot.bearing_to(waypoint),
        }
    }
}

pub fn progress_term(old: f64, new: f64) -> f64 {
    let delta = old - new;
    if delta >= 0.0 {
        delta
    } else {
        2.0 * delta
    }
}

/// Slack on the window edge so cells exactly on it are kept despite rounding.
const WINDOW_EPS: f64 = 1e-9;

/// Kernel-weighted mean of `cost/254` over cells whose centers fall in the
/// truncation square around the robot. Cells outside the grid count as free.
/// Returns a value in `[0, 1]`.
pub fn gaussian_penalty(grid: &OccupancyGrid, robot: &RobotState, params: &RewardParams) -> f64 {
    let res = grid.resolution();
    let hw = params.gaussian_half_width_m;
    let inv_two_sigma_sq = 1.0 / (2.0 * params.gaussian_sigma_m * params.gaussian_sigma_m);
    let origin = grid.origin();
    // cell index range whose centers lie within [x - hw, x + hw]
    let lo_x = ((robot.x - hw - origin.x) / res - 0.5).ceil() as i64 - 1;
    let hi_x = ((robot.x + hw - origin.x) / res - 0.5).floor() as i64 + 1;
    let lo_y = ((robot.y - hw - origin.y) / res - 0.5).ceil() as i64 - 1;
    let hi_y = ((robot.y + hw - origin.y) / res - 0.5).floor() as i64 + 1;
    let limit = hw + WINDOW_EPS;

    let mut mass = 0.0;
    let mut weighted = 0.0;
    for iy in lo_y..=hi_y {
        let cy = origin.y + (iy as f64 + 0.5) * res;
        for ix in lo_x..=hi_x {
            let cx = origin.x + (ix as f64 + 0.5) * res;
            let (dx, dy) = (cx - robot.x, cy - robot.y);
            if dx.abs() > limit || dy.abs() > limit {
                continue;
            }
            let k = (-(dx * dx + dy * dy) * inv_two_sigma_sq).exp();
            mass += k;
            if let Some((ux, uy)) = grid.cell_in_bounds(ix, iy) {
                let cost = f64::from(grid.get(ux, uy).min(LETHAL_COST)) / f64::from(LETHAL_COST);
                weighted += k * cost;
            }
        }
    }
    if mass > 0.0 {
        (weighted / mass).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// The reward equation itself, from precomputed terms. Returns the reward and
/// whether the transition is terminal (collision or goal).
pub fn reward(
    old: &WaypointGeometry,
    new: &WaypointGeometry,
    collided: bool,
    gaussian: f64,
    params: &RewardParams,
) -> (f64, bool) {
    let mut r = params.distance_weight * progress_term(old.distance, new.distance)
        + params.bearing_weight * progress_term(old.bearing.abs(), new.bearing.abs())
        - gaussian;
    let terminal = if collided {
        r -= params.r_max;
        true
    } else if new.distance <= params.goal_tolerance_m {
        r += params.r_max;
        true
    } else {
        false
    };
    (r, terminal)
}

/// Reward for moving from `robot` to `robot_next` toward `waypoint`, with
/// the Gaussian term evaluated on `costmap_next`.
pub fn transition_reward(
    robot: &RobotState,
    robot_next: &RobotState,
    waypoint: &Point,
    costmap_next: &OccupancyGrid,
    collided: bool,
    params: &RewardParams,
) -> (f64, bool) {
    let old = WaypointGeometry::new(robot, waypoint);
    let new = WaypointGeometry::new(robot_next, waypoint);
    let g = gaussian_penalty(costmap_next, robot_next, params);
    reward(&old, &new, collided, g, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom(d: f64, b: f64) -> WaypointGeometry {
        WaypointGeometry {
            distance: d,
            bearing: b,
        }
    }

    #[test]
    fn progress_branches() {
        assert!((progress_term(1.0, 0.8) - 0.2).abs() < 1e-15);
        assert!((progress_term(0.8, 1.0) + 0.4).abs() < 1e-15);
        assert_eq!(progress_term(0.5, 0.5), 0.0);
    }

    #[test]
    fn substitution_examples() {
        let p = RewardParams::default();
        let (r, t) = reward(&geom(1.0, 0.5), &geom(0.8, 0.3), false, 0.0, &p);
        assert!((r - 0.4).abs() < 1e-12 && !t);
        let (r, t) = reward(&geom(1.0, 0.5), &geom(1.0, 0.5), true, 0.3, &p);
        assert!((r + 10.3).abs() < 1e-12 && t);
        let (r, t) = reward(&geom(0.2, 0.1), &geom(0.0, 0.1), false, 0.0, &p);
        assert!((r - 10.2).abs() < 1e-12 && t);
    }

    #[test]
    fn collision_takes_precedence_over_goal() {
        let p = RewardParams::default();
        let (r, t) = reward(&geom(0.2, 0.0), &geom(0.1, 0.0), true, 0.0, &p);
        assert!(t);
        assert!((r - (0.1 - 10.0)).abs() < 1e-12);
    }

    #[test]
    fn penalty_extremes() {
        let p = RewardParams::default();
        let robot = RobotState::new(2.0, 2.0, 0.3);
        let mut g = OccupancyGrid::new(40, 40, 0.1, Point::default());
        assert_eq!(gaussian_penalty(&g, &robot, &p), 0.0);
        g.costs_mut().iter_mut().for_each(|c| *c = LETHAL_COST);
        assert!((gaussian_penalty(&g, &robot, &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_cell_matches_window_sum() {
        let p = RewardParams::default();
        let mut g = OccupancyGrid::new(40, 40, 0.1, Point::default());
        // robot at a cell center, obstacle cell 0.5 m = σ away
        let robot = RobotState::new(2.05, 2.05, 0.0);
        g.set(25, 20, LETHAL_COST);
        // brute force over every cell center in the 1 m square
        let mut mass = 0.0;
        for iy in -10i32..=10 {
            for ix in -10i32..=10 {
                let r2 = (f64::from(ix) * 0.1).powi(2) + (f64::from(iy) * 0.1).powi(2);
                mass += (-r2 / 0.5).exp();
            }
        }
        let expected = (-0.5f64).exp() / mass;
        assert!((gaussian_penalty(&g, &robot, &p) - expected).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn away_and_back_is_net_penalty(d in 0.5f64..5.0, delta in 1e-3f64..0.4) {
            let p = RewardParams::default();
            let b = 0.2;
            let (away, _) = reward(&geom(d, b), &geom(d + delta, b), false, 0.0, &p);
            let (back, _) = reward(&geom(d + delta, b), &geom(d, b), false, 0.0, &p);
            prop_assert!(away + back < 0.0);
        }

        #[test]
        fn translation_invariant(
            x in 1.0f64..3.0, y in 1.0f64..3.0, yaw in -3.0f64..3.0,
            sx in -5i32..5, sy in -5i32..5,
        ) {
            let p = RewardParams::default();
            let mut g = OccupancyGrid::new(40, 40, 0.1, Point::default());
            for i in 0..40 { g.set(i, 25, LETHAL_COST); }
            let robot = RobotState::new(x, y, yaw);
            let next = RobotState::new(x + 0.1, y - 0.05, yaw + 0.1);
            let wp = Point::new(3.5, 0.5);
            let base = transition_reward(&robot, &next, &wp, &g, false, &p);

            let (dx, dy) = (f64::from(sx) * 0.1, f64::from(sy) * 0.1);
            let mut shifted = OccupancyGrid::new(40, 40, 0.1, Point::new(dx, dy));
            shifted.costs_mut().copy_from_slice(g.costs());
            let moved = transition_reward(
                &RobotState::new(x + dx, y + dy, yaw),
                &RobotState::new(x + 0.1 + dx, y - 0.05 + dy, yaw + 0.1),
                &wp.translated(dx, dy),
                &shifted,
                false,
                &p,
            );
            prop_assert!((base.0 - moved.0).abs() < 1e-9);
            prop_assert_eq!(base.1, moved.1);
        }

        #[test]
        fn penalty_in_unit_interval(x in 0.0f64..4.0, y in 0.0f64..4.0, seed in 0u64..1000) {
            let p = RewardParams::default();
            let mut g = OccupancyGrid::new(40, 40, 0.1, Point::default());
            let mut s = seed;
            for c in g.costs_mut() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *c = (s >> 56) as u8;
            }
            let v = gaussian_penalty(&g, &RobotState::new(x, y, 0.0), &p);
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
