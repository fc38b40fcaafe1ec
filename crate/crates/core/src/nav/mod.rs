//! Classical navigation: global planning, waypoint handling, and the DWA
//! and shortest-path local planners.

mod dwa;
mod global;
mod sp;
mod waypoints;

pub use dwa::{dwa_candidates, dwa_plan, simulate_arc, DwaCandidate, DwaConfig};
pub use global::{plan_global, GlobalPlan, GlobalPlannerConfig, PlanError};
pub use sp::{sp_plan, SpConfig};
pub use waypoints::{make_waypoints, select_waypoint, WaypointList, WAYPOINT_WINDOW};
