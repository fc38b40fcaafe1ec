use serde::{Deserialize, Serialize};

use crate::geometry::{Action, ActionBounds, Point, RobotState};
use crate::grid::OccupancyGrid;
use crate::gridworld::{check_collision, step};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DwaConfig {
    pub max_linear_accel_mps2: f64,
    pub max_angular_accel_radps2: f64,
    pub bounds: ActionBounds,
    pub linear_samples: usize,
    pub angular_samples: usize,
    pub horizon_s: f64,
    pub sim_dt_s: f64,
    /// Control period the acceleration window is computed over.
    pub control_dt_s: f64,
    pub path_weight: f64,
    pub clearance_weight: f64,
    pub speed_weight: f64,
    /// Extra radius checked around each simulated pose. Zero on an inflated
    /// costmap, whose lethal region already covers the inscribed radius.
    pub footprint_radius_m: f64,
    /// Clearance beyond this distance scores the same as this distance.
    pub clearance_cap_m: f64,
}

impl Default for DwaConfig {
    fn default() -> Self {
        DwaConfig {
            max_linear_accel_mps2: 1.0,
            max_angular_accel_radps2: 2.0,
            bounds: ActionBounds::default(),
            linear_samples: 11,
            angular_samples: 21,
            horizon_s: 1.5,
            sim_dt_s: 0.1,
            control_dt_s: 0.2,
            path_weight: 1.0,
            clearance_weight: 0.3,
            speed_weight: 0.1,
            footprint_radius_m: 0.0,
            clearance_cap_m: 1.0,
        }
    }
}

impl DwaConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.linear_samples < 2 || self.angular_samples < 2 {
            return Err("DWA sample counts must be at least 2".into());
        }
        if !(self.horizon_s > 0.0 && self.sim_dt_s > 0.0 && self.control_dt_s > 0.0) {
            return Err("DWA horizon and timesteps must be positive".into());
        }
        if !(self.max_linear_accel_mps2 >= 0.0 && self.max_angular_accel_radps2 >= 0.0) {
            return Err("DWA accelerations must be non-negative".into());
        }
        self.bounds.validate()
    }

    fn sim_steps(&self) -> usize {
        ((self.horizon_s / self.sim_dt_s).round() as usize).max(1)
    }
}

/// One sampled velocity pair and its evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwaCandidate {
    pub action: Action,
    /// `None` when the arc collides.
    pub score: Option<f64>,
}

/// Poses along the constant-velocity arc, excluding the starting pose.
pub fn simulate_arc(robot: &RobotState, action: &Action, config: &DwaConfig) -> Vec<RobotState> {
    let mut pose = *robot;
    (0..config.sim_steps())
        .map(|_| {
            pose = step(&pose, action, config.sim_dt_s);
            pose
        })
        .collect()
}

fn lattice(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| {
        if i + 1 == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    })
}

/// The dynamic window around `velocity`, clipped to the bounds, sampled on an
/// evenly spaced lattice, and scored arc by arc.
pub fn dwa_candidates(
    robot: &RobotState,
    velocity: &Action,
    waypoint: &Point,
    grid: &OccupancyGrid,
    config: &DwaConfig,
) -> Vec<DwaCandidate> {
    let b = &config.bounds;
    let dv = config.max_linear_accel_mps2 * config.control_dt_s;
    let dw = config.max_angular_accel_radps2 * config.control_dt_s;
    let v_lo = (velocity.v - dv).max(b.v_min_mps);
    let v_hi = (velocity.v + dv).min(b.v_max_mps);
    let w_lo = (velocity.omega - dw).max(-b.omega_max_radps);
    let w_hi = (velocity.omega + dw).min(b.omega_max_radps);
    // a current velocity outside the bounds collapses the window onto the bound
    let (v_lo, v_hi) = if v_lo > v_hi { (v_hi, v_hi) } else { (v_lo, v_hi) };
    let (w_lo, w_hi) = if w_lo > w_hi { (w_hi, w_hi) } else { (w_lo, w_hi) };

    let mut out = Vec::with_capacity(config.linear_samples * config.angular_samples);
    for v in lattice(v_lo, v_hi, config.linear_samples) {
        for omega in lattice(w_lo, w_hi, config.angular_samples) {
            let action = Action::new(v, omega);
            out.push(DwaCandidate {
                action,
                score: score_arc(robot, &action, waypoint, grid, config),
            });
        }
    }
    out
}

fn score_arc(
    robot: &RobotState,
    action: &Action,
    waypoint: &Point,
    grid: &OccupancyGrid,
    config: &DwaConfig,
) -> Option<f64> {
    let mut clearance = config.clearance_cap_m;
    let poses = simulate_arc(robot, action, config);
    for pose in &poses {
        if check_collision(pose, grid, config.footprint_radius_m) {
            return None;
        }
        if let Some(d) = grid.nearest_lethal_within(&pose.position(), clearance) {
            clearance = clearance.min(d);
        }
    }
    let end = poses.last().expect("at least one simulated pose").position();
    Some(
        config.path_weight * -end.distance(waypoint)
            + config.clearance_weight * clearance
            + config.speed_weight * action.v,
    )
}

/// Highest-scoring admissible arc; ties go to the lowest |ω|, then the lowest
/// v, then the lowest ω. Returns the stop action when every arc collides.
pub fn dwa_plan(
    robot: &RobotState,
    velocity: &Action,
    waypoint: &Point,
    grid: &OccupancyGrid,
    config: &DwaConfig,
) -> Action {
    let mut best: Option<(f64, Action)> = None;
    for c in dwa_candidates(robot, velocity, waypoint, grid, config) {
        let Some(score) = c.score else { continue };
        let better = match best {
            None => true,
            Some((s, a)) => {
                score > s
                    || (score == s
                        && (c.action.omega.abs(), c.action.v, c.action.omega)
                            < (a.omega.abs(), a.v, a.omega))
            }
        };
        if better {
            best = Some((score, c.action));
        }
    }
    best.map_or(Action::STOP, |(_, a)| a)
}
