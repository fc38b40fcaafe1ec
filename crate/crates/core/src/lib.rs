//! Simulation substrate for the polarnav workbench.
//!
//! Everything here is deterministic and free of learned components: the
//! unicycle "dummy" environment, occupancy grids and their inflation layer,
//! the polar/Cartesian observation renderers, the shaped reward, and the
//! classical navigation stack (Dijkstra global planner, waypoint selection,
//! DWA and shortest-path local planners).

pub mod costmap;
pub mod geometry;
pub mod grid;
pub mod gridworld;
pub mod nav;
pub mod par;
pub mod reward;

pub use geometry::{wrap_angle, Action, ActionBounds, Point, RobotState};
pub use grid::{OccupancyGrid, LETHAL_COST};
