//! Declarative scenario descriptions and their JSON form.
//!
//! Every field is required in the JSON document; there are no implicit
//! defaults. Lengths are meters, times seconds, angles radians.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, RobotState};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario `{name}`: {reason}")]
    Invalid { name: String, reason: String },
    #[error("scenario io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario json error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    pub x_m: f64,
    pub y_m: f64,
    pub yaw_rad: f64,
}

impl From<PoseSpec> for RobotState {
    fn from(p: PoseSpec) -> Self {
        RobotState::new(p.x_m, p.y_m, p.yaw_rad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub x_m: f64,
    pub y_m: f64,
}

impl From<PointSpec> for Point {
    fn from(p: PointSpec) -> Self {
        Point::new(p.x_m, p.y_m)
    }
}

impl From<Point> for PointSpec {
    fn from(p: Point) -> Self {
        PointSpec { x_m: p.x, y_m: p.y }
    }
}

/// A static obstacle. `appear_s` is the time at which it becomes present;
/// zero means it is part of the initial map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum StaticObstacle {
    Rect {
        min_x_m: f64,
        min_y_m: f64,
        max_x_m: f64,
        max_y_m: f64,
        appear_s: f64,
    },
    Circle {
        center_x_m: f64,
        center_y_m: f64,
        radius_m: f64,
        appear_s: f64,
    },
}

impl StaticObstacle {
    pub fn rect(min: Point, max: Point) -> Self {
        StaticObstacle::Rect {
            min_x_m: min.x,
            min_y_m: min.y,
            max_x_m: max.x,
            max_y_m: max.y,
            appear_s: 0.0,
        }
    }

    pub fn circle(center: Point, radius: f64) -> Self {
        StaticObstacle::Circle {
            center_x_m: center.x,
            center_y_m: center.y,
            radius_m: radius,
            appear_s: 0.0,
        }
    }

    pub fn appearing_at(mut self, t: f64) -> Self {
        match &mut self {
            StaticObstacle::Rect { appear_s, .. } | StaticObstacle::Circle { appear_s, .. } => {
                *appear_s = t
            }
        }
        self
    }

    pub fn appear_s(&self) -> f64 {
        match *self {
            StaticObstacle::Rect { appear_s, .. } | StaticObstacle::Circle { appear_s, .. } => {
                appear_s
            }
        }
    }

    pub fn is_present(&self, t: f64) -> bool {
        self.appear_s() <= t
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bounds(&self) -> (Point, Point) {
        match *self {
            StaticObstacle::Rect {
                min_x_m,
                min_y_m,
                max_x_m,
                max_y_m,
                ..
            } => (Point::new(min_x_m, min_y_m), Point::new(max_x_m, max_y_m)),
            StaticObstacle::Circle {
                center_x_m,
                center_y_m,
                radius_m,
                ..
            } => (
                Point::new(center_x_m - radius_m, center_y_m - radius_m),
                Point::new(center_x_m + radius_m, center_y_m + radius_m),
            ),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match *self {
            StaticObstacle::Rect {
                min_x_m,
                min_y_m,
                max_x_m,
                max_y_m,
                ..
            } => p.x >= min_x_m && p.x <= max_x_m && p.y >= min_y_m && p.y <= max_y_m,
            StaticObstacle::Circle {
                center_x_m,
                center_y_m,
                radius_m,
                ..
            } => Point::new(center_x_m, center_y_m).distance(p) <= radius_m,
        }
    }
}

/// A disk that travels a piecewise-linear route at per-segment speeds.
///
/// It waits at the first waypoint until `depart_s`, then follows the
/// segments and holds the final waypoint afterwards. When `halt_within_m`
/// is set, the simulator freezes the obstacle for the rest of the episode
/// the first time its center comes within that distance of the robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovingObstacle {
    pub radius_m: f64,
    pub depart_s: f64,
    pub waypoints: Vec<PointSpec>,
    pub segment_speeds_mps: Vec<f64>,
    #[serde(deserialize_with = "Option::deserialize")]
    pub halt_within_m: Option<f64>,
}

impl MovingObstacle {
    /// Interpolated center at time `t` (ignores halting).
    pub fn position_at(&self, t: f64) -> Point {
        let first: Point = self.waypoints[0].into();
        let mut remaining = t - self.depart_s;
        if remaining <= 0.0 {
            return first;
        }
        for (seg, &speed) in self.waypoints.windows(2).zip(&self.segment_speeds_mps) {
            let a: Point = seg[0].into();
            let b: Point = seg[1].into();
            let len = a.distance(&b);
            let duration = len / speed;
            if remaining <= duration {
                let f = if duration > 0.0 { remaining / duration } else { 1.0 };
                return Point::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y));
            }
            remaining -= duration;
        }
        (*self.waypoints.last().expect("validated non-empty")).into()
    }

    /// Time at which the schedule reaches its final waypoint.
    pub fn schedule_end_s(&self) -> f64 {
        self.depart_s
            + self
                .waypoints
                .windows(2)
                .zip(&self.segment_speeds_mps)
                .map(|(seg, &v)| Point::from(seg[0]).distance(&seg[1].into()) / v)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub width_cells: usize,
    pub height_cells: usize,
    pub resolution_m: f64,
    pub origin_x_m: f64,
    pub origin_y_m: f64,
    pub static_obstacles: Vec<StaticObstacle>,
    pub start: PoseSpec,
    pub goal: PointSpec,
    pub moving_obstacles: Vec<MovingObstacle>,
    pub max_steps: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    /// Obstacle-free scenario of the given metric size.
    pub fn open(name: &str, width_m: f64, height_m: f64, resolution_m: f64) -> Self {
        ScenarioSpec {
            name: name.to_string(),
            width_cells: (width_m / resolution_m).round() as usize,
            height_cells: (height_m / resolution_m).round() as usize,
            resolution_m,
            origin_x_m: 0.0,
            origin_y_m: 0.0,
            static_obstacles: Vec::new(),
            start: PoseSpec {
                x_m: width_m / 2.0,
                y_m: height_m / 2.0,
                yaw_rad: 0.0,
            },
            goal: PointSpec {
                x_m: width_m / 2.0,
                y_m: height_m / 2.0,
            },
            moving_obstacles: Vec::new(),
            max_steps: 200,
            seed: 0,
        }
    }

    pub fn start_state(&self) -> RobotState {
        self.start.into()
    }

    pub fn goal_point(&self) -> Point {
        self.goal.into()
    }

    pub fn origin(&self) -> Point {
        Point::new(self.origin_x_m, self.origin_y_m)
    }

    pub fn width_m(&self) -> f64 {
        self.width_cells as f64 * self.resolution_m
    }

    pub fn height_m(&self) -> f64 {
        self.height_cells as f64 * self.resolution_m
    }

    fn in_bounds(&self, p: &Point) -> bool {
        p.x >= self.origin_x_m
            && p.y >= self.origin_y_m
            && p.x <= self.origin_x_m + self.width_m()
            && p.y <= self.origin_y_m + self.height_m()
    }

    /// Mover centers at time `t`, following their schedules.
    pub fn moving_obstacle_positions(&self, t: f64) -> Vec<Point> {
        advance_moving_obstacles(self, t)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |reason: String| {
            Err(ScenarioError::Invalid {
                name: self.name.clone(),
                reason,
            })
        };
        if !(self.resolution_m > 0.0) || !self.resolution_m.is_finite() {
            return fail(format!("resolution_m must be > 0, got {}", self.resolution_m));
        }
        if self.width_cells == 0 || self.height_cells == 0 {
            return fail("grid dimensions must be non-zero".into());
        }
        if self.max_steps == 0 {
            return fail("max_steps must be at least 1".into());
        }
        let start = self.start_state();
        let goal = self.goal_point();
        if !self.in_bounds(&start.position()) || !start.yaw.is_finite() {
            return fail(format!("start {start:?} outside the grid"));
        }
        if !self.in_bounds(&goal) {
            return fail(format!("goal {goal:?} outside the grid"));
        }
        for (i, ob) in self.static_obstacles.iter().enumerate() {
            let (lo, hi) = ob.bounds();
            if !(lo.x <= hi.x && lo.y <= hi.y) {
                return fail(format!("static obstacle {i} has inverted bounds"));
            }
            if !self.in_bounds(&lo) || !self.in_bounds(&hi) {
                return fail(format!("static obstacle {i} extends outside the grid"));
            }
            if !(ob.appear_s() >= 0.0) {
                return fail(format!("static obstacle {i} has negative appear_s"));
            }
            if ob.is_present(0.0) && ob.contains(&start.position()) {
                return fail(format!("start lies inside static obstacle {i}"));
            }
            if ob.is_present(0.0) && ob.contains(&goal) {
                return fail(format!("goal lies inside static obstacle {i}"));
            }
        }
        for (i, m) in self.moving_obstacles.iter().enumerate() {
            if m.waypoints.is_empty() {
                return fail(format!("moving obstacle {i} has no waypoints"));
            }
            if m.segment_speeds_mps.len() + 1 != m.waypoints.len() {
                return fail(format!(
                    "moving obstacle {i}: {} waypoints need {} segment speeds, got {}",
                    m.waypoints.len(),
                    m.waypoints.len() - 1,
                    m.segment_speeds_mps.len()
                ));
            }
            if m.segment_speeds_mps.iter().any(|&v| !(v > 0.0)) {
                return fail(format!("moving obstacle {i} has a non-positive speed"));
            }
            if !(m.radius_m > 0.0) || !(m.depart_s >= 0.0) {
                return fail(format!("moving obstacle {i} has invalid radius or depart time"));
            }
            if m.halt_within_m.is_some_and(|h| !(h >= 0.0)) {
                return fail(format!("moving obstacle {i} has a negative halt distance"));
            }
            for wp in &m.waypoints {
                let p: Point = (*wp).into();
                let r = m.radius_m;
                if !self.in_bounds(&p.translated(-r, -r)) || !self.in_bounds(&p.translated(r, r)) {
                    return fail(format!("moving obstacle {i} leaves the grid"));
                }
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let spec: ScenarioSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

/// Positions of every moving obstacle at time `t` along its schedule.
pub fn advance_moving_obstacles(spec: &ScenarioSpec, t: f64) -> Vec<Point> {
    spec.moving_obstacles.iter().map(|m| m.position_at(t)).collect()
}
