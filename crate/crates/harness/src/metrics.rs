//! Per-step trajectory logs and the per-episode travel metrics.

use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use serde::{Deserialize, Serialize};

use polarnav_core::gridworld::{raycast, EpisodeStatus};
use polarnav_core::{OccupancyGrid, Point, RobotState};

/// Rays spanning the front sector, evenly from −π/4 to +π/4.
pub const FRONT_RAYS: usize = 9;
pub const FRONT_HALF_ANGLE_RAD: f64 = FRAC_PI_4;
/// Rays report this distance when nothing is hit.
pub const FRONT_MAX_RANGE_M: f64 = 8.0;

/// Distance to the nearest lethal cell within ±π/4 of the heading.
pub fn min_front_obstacle_dist(state: &RobotState, world: &OccupancyGrid) -> f64 {
    (0..FRONT_RAYS)
        .map(|i| {
            let f = i as f64 / (FRONT_RAYS - 1) as f64;
            let bearing = -FRONT_HALF_ANGLE_RAD + 2.0 * FRONT_HALF_ANGLE_RAD * f;
            raycast(state, world, bearing, FRONT_MAX_RANGE_M)
        })
        .fold(f64::INFINITY, f64::min)
}

/// One CSV row: the pose at `t_s`, the command issued there, and the reward
/// for the resulting transition. The final row holds the terminal pose,
/// zero command and reward, and the episode outcome in `status`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub t_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub yaw_rad: f64,
    pub v_mps: f64,
    pub omega_radps: f64,
    pub min_front_obstacle_dist_m: f64,
    pub reward: f64,
    pub status: String,
}

impl LogRow {
    pub fn state(&self) -> RobotState {
        RobotState::new(self.x_m, self.y_m, self.yaw_rad)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub scenario: String,
    pub planner: String,
    pub seed: u64,
    pub rows: Vec<LogRow>,
    /// Moving-obstacle centers at each row's time.
    pub movers: Vec<Vec<Point>>,
    pub mover_radii_m: Vec<f64>,
}

impl TrajectoryLog {
    /// Outcome recorded in the terminal row.
    pub fn terminal_status(&self) -> Option<EpisodeStatus> {
        match self.rows.last()?.status.as_str() {
            "success" => Some(EpisodeStatus::Success),
            "collision" => Some(EpisodeStatus::Collision),
            "timeout" => Some(EpisodeStatus::Timeout),
            _ => None,
        }
    }

    /// Rows that carry an executed command (all but the terminal one).
    pub fn step_rows(&self) -> &[LogRow] {
        &self.rows[..self.rows.len().saturating_sub(1)]
    }

    pub fn file_name(&self) -> String {
        format!("{}_{}_seed{}.csv", self.scenario, self.planner, self.seed)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads rows written by [`TrajectoryLog::write_csv`]; mover positions
    /// are not part of the CSV.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<LogRow>, csv::Error> {
        csv::Reader::from_path(path)?.deserialize().collect()
    }
}

/// Travel statistics of one episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub status: EpisodeStatus,
    pub steps: usize,
    pub travel_time_s: f64,
    /// Integral of |v| over the episode.
    pub travel_distance_m: f64,
    pub mean_speed_mps: f64,
}

impl EpisodeMetrics {
    pub fn from_rows(rows: &[LogRow], status: EpisodeStatus, dt_s: f64) -> Self {
        let steps = rows.len();
        let travel_time_s = steps as f64 * dt_s;
        let travel_distance_m: f64 = rows.iter().map(|r| r.v_mps.abs() * dt_s).sum();
        EpisodeMetrics {
            status,
            steps,
            travel_time_s,
            travel_distance_m,
            mean_speed_mps: if travel_time_s > 0.0 {
                travel_distance_m / travel_time_s
            } else {
                0.0
            },
        }
    }
}
