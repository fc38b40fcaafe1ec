use serde::{Deserialize, Serialize};

use super::cartesian::{render_cartesian, CartesianParams, CartesianVariant};
use super::frames::ObsImage;
use super::polar::{render_polar, PolarParams};
use crate::geometry::{Point, RobotState};
use crate::grid::OccupancyGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Polar,
    CartesianRotation,
    CartesianArrow,
    CartesianChannel,
}

/// Which renderer feeds the agent and at what size.
///
/// For polar images `rows` are angle bins and `cols` range bins over
/// `[0, range_m]`; Cartesian crops span a `2·range_m` square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationConfig {
    pub representation: Representation,
    pub rows: usize,
    pub cols: usize,
    pub range_m: f64,
    pub marker_px: usize,
    pub frame_stack: usize,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        Self {
            representation: Representation::Polar,
            rows: 64,
            cols: 64,
            range_m: 4.0,
            marker_px: 3,
            frame_stack: 1,
        }
    }
}

impl ObservationConfig {
    pub fn desk() -> Self {
        Self {
            rows: 40,
            cols: 40,
            ..Self::default()
        }
    }

    pub fn base_channels(&self) -> usize {
        match self.representation {
            Representation::CartesianChannel => 4,
            _ => 3,
        }
    }

    /// Shape of the stacked observation fed to the encoder.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.base_channels() * self.frame_stack, self.rows, self.cols)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.rows < 2 || self.cols < 2 || !(self.range_m > 0.0) || self.frame_stack == 0 {
            return Err(format!("invalid observation config {self:?}"));
        }
        Ok(())
    }

    /// Renders a single (unstacked) frame.
    pub fn render(&self, costmap: &OccupancyGrid, robot: &RobotState, waypoint: &Point) -> ObsImage {
        let variant = match self.representation {
            Representation::Polar => {
                let params = PolarParams {
                    angle_bins: self.rows,
                    distance_bins: self.cols,
                    r_max_m: self.range_m,
                    marker_px: self.marker_px,
                };
                return render_polar(costmap, robot, waypoint, &params);
            }
            Representation::CartesianRotation => CartesianVariant::Rotation,
            Representation::CartesianArrow => CartesianVariant::Arrow,
            Representation::CartesianChannel => CartesianVariant::Channel,
        };
        let params = CartesianParams {
            height: self.rows,
            width: self.cols,
            window_m: 2.0 * self.range_m,
            marker_px: self.marker_px,
        };
        render_cartesian(costmap, robot, waypoint, variant, &params).image
    }
}
