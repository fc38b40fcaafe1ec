//! SVG plots of one episode: map, movers, trajectory colored by speed.

use std::fmt::Write;

use polarnav_core::gridworld::{EpisodeStatus, ScenarioSpec, StaticObstacle};
use polarnav_core::ActionBounds;

use crate::metrics::TrajectoryLog;

/// Pixels per meter.
pub const SCALE_PX: f64 = 60.0;
pub const OBSTACLE_FILL: &str = "#808080";
pub const MOVER_FILL: &str = "#e07b00";
/// Stroke of every segment driven backwards.
pub const REVERSE_STROKE: &str = "#d62728";
pub const START_FILL: &str = "#2ca02c";
pub const GOAL_FILL: &str = "#ffbf00";
pub const COLLISION_STROKE: &str = "#000000";

/// Forward speeds shade from light to dark blue with `v / v_max`.
pub fn forward_stroke(v: f64, bounds: &ActionBounds) -> String {
    let f = (v / bounds.v_max_mps).clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(198.0, 8.0), lerp(219.0, 48.0), lerp(239.0, 107.0))
}

pub fn segment_stroke(v: f64, bounds: &ActionBounds) -> String {
    if v < 0.0 {
        REVERSE_STROKE.to_string()
    } else {
        forward_stroke(v, bounds)
    }
}

struct Frame {
    ox: f64,
    oy: f64,
    h_m: f64,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        (x - self.ox) * SCALE_PX
    }

    fn y(&self, y: f64) -> f64 {
        (self.h_m - (y - self.oy)) * SCALE_PX
    }
}

/// Renders `log` over the map of `spec`. Obstacles that appear mid-episode
/// are drawn dashed.
pub fn render_svg(spec: &ScenarioSpec, log: &TrajectoryLog, bounds: &ActionBounds) -> String {
    let f = Frame {
        ox: spec.origin_x_m,
        oy: spec.origin_y_m,
        h_m: spec.height_m(),
    };
    let (w_px, h_px) = (spec.width_m() * SCALE_PX, spec.height_m() * SCALE_PX);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w_px:.0}" height="{h_px:.0}" viewBox="0 0 {w_px:.1} {h_px:.1}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w_px:.1}" height="{h_px:.1}" fill="white" stroke="black"/>"#);
    let _ = writeln!(s, r#"<title>{} {} seed {}</title>"#, log.scenario, log.planner, log.seed);

    for ob in &spec.static_obstacles {
        let dash = if ob.appear_s() > 0.0 { r#" stroke="black" stroke-dasharray="4 3""# } else { "" };
        match *ob {
            StaticObstacle::Rect {
                min_x_m,
                min_y_m,
                max_x_m,
                max_y_m,
                ..
            } => {
                let _ = writeln!(
                    s,
                    r#"<rect class="obstacle" x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{OBSTACLE_FILL}"{dash}/>"#,
                    f.x(min_x_m),
                    f.y(max_y_m),
                    (max_x_m - min_x_m) * SCALE_PX,
                    (max_y_m - min_y_m) * SCALE_PX
                );
            }
            StaticObstacle::Circle {
                center_x_m,
                center_y_m,
                radius_m,
                ..
            } => {
                let _ = writeln!(
                    s,
                    r#"<circle class="obstacle" cx="{:.1}" cy="{:.1}" r="{:.1}" fill="{OBSTACLE_FILL}"{dash}/>"#,
                    f.x(center_x_m),
                    f.y(center_y_m),
                    radius_m * SCALE_PX
                );
            }
        }
    }

    for step in &log.movers {
        for (p, r) in step.iter().zip(&log.mover_radii_m) {
            let _ = writeln!(
                s,
                r#"<circle class="mover" cx="{:.1}" cy="{:.1}" r="{:.1}" fill="{MOVER_FILL}" fill-opacity="0.08"/>"#,
                f.x(p.x),
                f.y(p.y),
                r * SCALE_PX
            );
        }
    }

    for pair in log.rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let _ = writeln!(
            s,
            r#"<line class="segment" x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{}" stroke-width="3" stroke-linecap="round"/>"#,
            f.x(a.x_m),
            f.y(a.y_m),
            f.x(b.x_m),
            f.y(b.y_m),
            segment_stroke(a.v_mps, bounds)
        );
    }

    let start = spec.start;
    let _ = writeln!(
        s,
        r#"<circle class="start" cx="{:.1}" cy="{:.1}" r="6" fill="{START_FILL}"/>"#,
        f.x(start.x_m),
        f.y(start.y_m)
    );
    let (gx, gy) = (f.x(spec.goal.x_m), f.y(spec.goal.y_m));
    let _ = writeln!(
        s,
        r#"<rect class="goal" x="{:.1}" y="{:.1}" width="12" height="12" fill="{GOAL_FILL}" stroke="black" transform="rotate(45 {gx:.1} {gy:.1})"/>"#,
        gx - 6.0,
        gy - 6.0
    );
    if log.terminal_status() == Some(EpisodeStatus::Collision) {
        if let Some(end) = log.rows.last() {
            let (x, y) = (f.x(end.x_m), f.y(end.y_m));
            let _ = writeln!(
                s,
                r#"<path class="collision" d="M {:.1} {:.1} L {:.1} {:.1} M {:.1} {:.1} L {:.1} {:.1}" stroke="{COLLISION_STROKE}" stroke-width="3"/>"#,
                x - 8.0,
                y - 8.0,
                x + 8.0,
                y + 8.0,
                x - 8.0,
                y + 8.0,
                x + 8.0,
                y - 8.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
