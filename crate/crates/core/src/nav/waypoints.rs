use crate::geometry::{Point, RobotState};
use crate::grid::OccupancyGrid;

use super::global::GlobalPlan;

/// Number of entries in the waypoint window.
pub const WAYPOINT_WINDOW: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct WaypointList {
    pub points: [Point; WAYPOINT_WINDOW],
    /// Index into the full waypoint sequence where the window starts.
    pub start: usize,
    /// Index of the chosen entry within the window.
    pub selected: usize,
}

impl WaypointList {
    pub fn selected_point(&self) -> Point {
        self.points[self.selected]
    }
}

/// Samples the plan at arc-length multiples of `spacing`; the goal is
/// always appended as the final waypoint.
///
/// # Panics
/// When `spacing` is not positive or the plan is empty.
pub fn make_waypoints(plan: &GlobalPlan, spacing: f64) -> Vec<Point> {
    assert!(spacing > 0.0, "waypoint spacing must be positive");
    let goal = *plan.points.last().expect("plan has at least one point");
    let mut out = Vec::new();
    let mut next = spacing;
    let mut travelled = 0.0;
    for seg in plan.points.windows(2) {
        let len = seg[0].distance(&seg[1]);
        while next <= travelled + len && next < plan.length_m - 1e-9 {
            let f = (next - travelled) / len;
            out.push(Point::new(
                seg[0].x + f * (seg[1].x - seg[0].x),
                seg[0].y + f * (seg[1].y - seg[0].y),
            ));
            next += spacing;
        }
        travelled += len;
    }
    out.push(goal);
    out
}

/// Picks the waypoint to steer toward.
///
/// The window holds the eight waypoints starting one past the waypoint
/// closest to the robot (padded with the goal). The first entry farther
/// than `clearance` from every lethal cell of `grid` is selected, or the
/// last entry when none qualifies.
///
/// # Panics
/// When `waypoints` is empty.
pub fn select_waypoint(
    waypoints: &[Point],
    robot: &RobotState,
    grid: &OccupancyGrid,
    clearance: f64,
) -> (Point, WaypointList) {
    assert!(!waypoints.is_empty(), "no waypoints to select from");
    let here = robot.position();
    let mut closest = 0;
    let mut best = f64::INFINITY;
    for (i, w) in waypoints.iter().enumerate() {
        let d = w.distance(&here);
        if d < best {
            best = d;
            closest = i;
        }
    }
    let last = waypoints.len() - 1;
    let start = (closest + 1).min(last);
    let points: [Point; WAYPOINT_WINDOW] =
        std::array::from_fn(|k| waypoints[(start + k).min(last)]);
    let selected = points
        .iter()
        .position(|p| grid.nearest_lethal_within(p, clearance).is_none())
        .unwrap_or(WAYPOINT_WINDOW - 1);
    let list = WaypointList {
        points,
        start,
        selected,
    };
    (list.selected_point(), list)
}
