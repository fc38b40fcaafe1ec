use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::frames::ObsImage;
use crate::geometry::{Point, RobotState};
use crate::grid::{OccupancyGrid, LETHAL_COST};

/// How heading information is attached to a Cartesian crop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CartesianVariant {
    /// Window resampled in the robot frame: heading always points right.
    Rotation,
    /// World-aligned window with an oriented triangle drawn at the center.
    Arrow,
    /// World-aligned window plus a constant plane holding `(yaw + π) / 2π`.
    Channel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianParams {
    pub height: usize,
    pub width: usize,
    /// Side of the square window centered on the robot, meters.
    pub window_m: f64,
    pub marker_px: usize,
}

impl Default for CartesianParams {
    fn default() -> Self {
        Self {
            height: 64,
            width: 64,
            window_m: 8.0,
            marker_px: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartesianObservation {
    pub image: ObsImage,
    pub variant: CartesianVariant,
}

/// Renders a robot-centered Cartesian crop. Image up is +y (world, or robot
/// left for [`CartesianVariant::Rotation`]); image right is +x.
///
/// Channels 0–2 follow the polar layout (obstacle cost, white waypoint
/// marker). The arrow is drawn into channel 2 only.
pub fn render_cartesian(
    grid: &OccupancyGrid,
    robot: &RobotState,
    waypoint: &Point,
    variant: CartesianVariant,
    params: &CartesianParams,
) -> CartesianObservation {
    let (h, w) = (params.height, params.width);
    let channels = if variant == CartesianVariant::Channel { 4 } else { 3 };
    let mut img = ObsImage::zeros(channels, h, w);
    let px_w = params.window_m / w as f64;
    let px_h = params.window_m / h as f64;
    let rotate = variant == CartesianVariant::Rotation;
    let (s, c) = if rotate { robot.yaw.sin_cos() } else { (0.0, 1.0) };
    let lethal = LETHAL_COST as f32;

    for i in 0..h {
        let oy = (h as f64 / 2.0 - i as f64 - 0.5) * px_h;
        for j in 0..w {
            let ox = (j as f64 + 0.5 - w as f64 / 2.0) * px_w;
            let p = Point::new(robot.x + c * ox - s * oy, robot.y + s * ox + c * oy);
            img.set(0, i, j, f32::from(grid.cost_at(&p)).min(lethal) / lethal);
        }
    }

    if variant == CartesianVariant::Arrow {
        draw_arrow(&mut img, robot.yaw);
    }

    let (dx, dy) = (waypoint.x - robot.x, waypoint.y - robot.y);
    let (lx, ly) = (c * dx + s * dy, -s * dx + c * dy);
    let col = (lx / px_w + w as f64 / 2.0).floor().clamp(0.0, (w - 1) as f64) as i64;
    let row = (h as f64 / 2.0 - ly / px_h).floor().clamp(0.0, (h - 1) as f64) as i64;
    let half = (params.marker_px / 2) as i64;
    let hi = params.marker_px as i64 - 1 - half;
    for r in (row - half)..=(row + hi) {
        for cc in (col - half)..=(col + hi) {
            if r < 0 || cc < 0 || r >= h as i64 || cc >= w as i64 {
                continue;
            }
            for ch in 0..3 {
                img.set(ch, r as usize, cc as usize, 1.0);
            }
        }
    }

    if variant == CartesianVariant::Channel {
        let value = ((robot.yaw + PI) / (2.0 * PI)) as f32;
        let n = h * w;
        img.data[3 * n..4 * n].iter_mut().for_each(|v| *v = value);
    }

    CartesianObservation { image: img, variant }
}

/// Triangle pointing along `yaw`, apex `w/8` pixels from the center.
fn draw_arrow(img: &mut ObsImage, yaw: f64) {
    let (h, w) = (img.height as f64, img.width as f64);
    let center = (w / 2.0, h / 2.0);
    let len = (w.min(h) / 8.0).max(2.0);
    // pixel space has y pointing down
    let dir = (yaw.cos(), -yaw.sin());
    let perp = (-dir.1, dir.0);
    let apex = (center.0 + len * dir.0, center.1 + len * dir.1);
    let base = (center.0 - 0.5 * len * dir.0, center.1 - 0.5 * len * dir.1);
    let b1 = (base.0 + 0.5 * len * perp.0, base.1 + 0.5 * len * perp.1);
    let b2 = (base.0 - 0.5 * len * perp.0, base.1 - 0.5 * len * perp.1);
    for i in 0..img.height {
        for j in 0..img.width {
            let p = (j as f64 + 0.5, i as f64 + 0.5);
            if in_triangle(p, apex, b1, b2) {
                img.set(2, i, j, 1.0);
            }
        }
    }
}

fn in_triangle(p: (f64, f64), a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> bool {
    let cross = |o: (f64, f64), u: (f64, f64), v: (f64, f64)| {
        (u.0 - o.0) * (v.1 - o.1) - (u.1 - o.1) * (v.0 - o.0)
    };
    let d1 = cross(p, a, b);
    let d2 = cross(p, b, c);
    let d3 = cross(p, c, a);
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}
