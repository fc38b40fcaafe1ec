use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::frames::ObsImage;
use crate::geometry::{Point, RobotState};
use crate::grid::{OccupancyGrid, LETHAL_COST};

/// Polar costmap: rows are bearing bins over `[-π, π)` relative to the
/// robot heading, columns are range bins over `[0, r_max]`.
pub type PolarCostmap = ObsImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarParams {
    pub angle_bins: usize,
    pub distance_bins: usize,
    pub r_max_m: f64,
    /// Side length of the waypoint marker, pixels.
    pub marker_px: usize,
}

impl Default for PolarParams {
    fn default() -> Self {
        Self {
            angle_bins: 64,
            distance_bins: 64,
            r_max_m: 4.0,
            marker_px: 3,
        }
    }
}

/// Angle row containing `bearing` (radians, any range).
pub fn polar_angle_row(bearing: f64, angle_bins: usize) -> usize {
    let wrapped = crate::geometry::wrap_angle(bearing);
    let row = ((wrapped + PI) / (2.0 * PI) * angle_bins as f64).floor() as usize;
    row.min(angle_bins - 1)
}

/// Range column containing `distance`; ranges beyond `r_max` land in the
/// last column.
pub fn polar_distance_col(distance: f64, distance_bins: usize, r_max: f64) -> usize {
    let col = (distance / r_max * distance_bins as f64).floor();
    (col.max(0.0) as usize).min(distance_bins - 1)
}

/// Renders obstacle cost and the waypoint marker in robot-centric polar
/// coordinates.
///
/// Channel 0 holds `cost/254` sampled (nearest cell) at each bin center.
/// The waypoint is a white `marker_px` square (all three channels set to 1),
/// wrapping across the ±π seam in the angle direction and clipped at the
/// range edges.
pub fn render_polar(
    grid: &OccupancyGrid,
    robot: &RobotState,
    waypoint: &Point,
    params: &PolarParams,
) -> PolarCostmap {
    let (a_bins, d_bins) = (params.angle_bins, params.distance_bins);
    let mut img = ObsImage::zeros(3, a_bins, d_bins);
    let angle_step = 2.0 * PI / a_bins as f64;
    let range_step = params.r_max_m / d_bins as f64;
    let lethal = LETHAL_COST as f32;

    for a in 0..a_bins {
        let theta = robot.yaw + (-PI + (a as f64 + 0.5) * angle_step);
        let (s, c) = theta.sin_cos();
        let row = &mut img.data[a * d_bins..(a + 1) * d_bins];
        for (d, px) in row.iter_mut().enumerate() {
            let r = (d as f64 + 0.5) * range_step;
            let p = Point::new(robot.x + r * c, robot.y + r * s);
            *px = f32::from(grid.cost_at(&p)).min(lethal) / lethal;
        }
    }

    let row = polar_angle_row(robot.bearing_to(waypoint), a_bins) as i64;
    let col = polar_distance_col(robot.position().distance(waypoint), d_bins, params.r_max_m) as i64;
    let half = (params.marker_px / 2) as i64;
    let lo = -half;
    let hi = params.marker_px as i64 - 1 - half;
    for dr in lo..=hi {
        let r = (row + dr).rem_euclid(a_bins as i64) as usize;
        for dc in lo..=hi {
            let c = col + dc;
            if c < 0 || c >= d_bins as i64 {
                continue;
            }
            for ch in 0..3 {
                img.set(ch, r, c as usize, 1.0);
            }
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty() -> OccupancyGrid {
        OccupancyGrid::new(100, 100, 0.1, Point::new(-5.0, -5.0))
    }

    fn marker_cells(img: &ObsImage) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..img.height {
            for c in 0..img.width {
                if img.get(1, r, c) == 1.0 {
                    out.push((r, c));
                }
            }
        }
        out
    }

    #[test]
    fn waypoint_dead_ahead_lands_mid_row() {
        let img = render_polar(
            &empty(),
            &RobotState::new(0.0, 0.0, 0.0),
            &Point::new(2.0, 0.0),
            &PolarParams::default(),
        );
        let cells = marker_cells(&img);
        assert_eq!(cells.len(), 9);
        assert!(cells.contains(&(32, 32)));
        for (r, c) in cells {
            assert!((31..=33).contains(&r) && (31..=33).contains(&c));
        }
        assert!(img.plane(0).iter().zip(img.plane(1)).all(|(a, b)| a == b));
    }

    #[test]
    fn obstacle_behind_appears_at_seam() {
        let mut g = empty();
        for iy in 48..52 {
            for ix in 30..34 {
                g.set(ix, iy, LETHAL_COST);
            }
        }
        // far waypoint out of the way
        let img = render_polar(
            &g,
            &RobotState::new(0.0, 0.0, 0.0),
            &Point::new(0.0, 3.0),
            &PolarParams::default(),
        );
        let rows: Vec<usize> = (0..64)
            .filter(|&r| (0..64).any(|c| img.get(0, r, c) == 1.0 && img.get(1, r, c) == 0.0))
            .collect();
        assert!(rows.contains(&0) && rows.contains(&63), "rows {rows:?}");
        assert!(rows.iter().all(|&r| r <= 2 || r >= 61));
    }

    #[test]
    fn far_waypoint_clamps_to_last_column() {
        let img = render_polar(
            &empty(),
            &RobotState::new(0.0, 0.0, 1.0),
            &Point::new(-4.0, -4.0),
            &PolarParams::default(),
        );
        let cells = marker_cells(&img);
        assert_eq!(cells.len(), 6);
        assert!(cells.iter().all(|&(_, c)| c >= 62));
    }

    #[test]
    fn values_in_unit_interval() {
        let mut g = empty();
        g.costs_mut().iter_mut().enumerate().for_each(|(i, c)| *c = (i % 256) as u8);
        let img = render_polar(
            &g,
            &RobotState::new(0.3, -0.2, 2.0),
            &Point::new(1.0, 1.0),
            &PolarParams::default(),
        );
        assert!(img.data.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
