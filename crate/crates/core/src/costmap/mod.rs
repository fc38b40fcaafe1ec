//! Occupancy-grid construction, the inflation layer and observation renderers.

mod cartesian;
mod export;
mod frames;
mod inflation;
mod observation;
mod polar;
mod raster;

pub use cartesian::{render_cartesian, CartesianObservation, CartesianParams, CartesianVariant};
pub use export::{read_raw_f32, write_grid_pgm, write_observation_png, write_raw_f32};
pub use frames::{stack_frames, FrameError, FrameStack, ObsImage};
pub use inflation::{inflate, inflate_with, inflation_cost, DistanceMethod, InflationParams};
pub use observation::{ObservationConfig, Representation};
pub use polar::{polar_angle_row, polar_distance_col, render_polar, PolarCostmap, PolarParams};
pub use raster::{grid_for, rasterize, rasterize_at};
