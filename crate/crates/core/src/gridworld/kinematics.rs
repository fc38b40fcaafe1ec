use crate::geometry::{Action, RobotState};
use crate::grid::OccupancyGrid;

/// Forward-Euler unicycle update. No clamping happens here; the environment
/// clamps actions to its bounds before calling this.
pub fn step(state: &RobotState, action: &Action, dt: f64) -> RobotState {
    let (s, c) = state.yaw.sin_cos();
    RobotState::new(
        state.x + action.v * c * dt,
        state.y + action.v * s * dt,
        state.yaw + action.omega * dt,
    )
}

/// True when the circular footprint touches a lethal cell: the center's own
/// cell is lethal, or a lethal cell center lies within `footprint_radius`.
/// Poses outside the grid count as collisions.
pub fn check_collision(state: &RobotState, world: &OccupancyGrid, footprint_radius: f64) -> bool {
    let p = state.position();
    let Some((ix, iy)) = world.world_to_cell(&p) else {
        return true;
    };
    world.is_lethal(ix, iy) || world.nearest_lethal_within(&p, footprint_radius).is_some()
}

/// Distance along `yaw + bearing` to the first lethal cell (grid traversal),
/// or `max_range` when none is hit within range or the ray leaves the grid.
pub fn raycast(
    state: &RobotState,
    world: &OccupancyGrid,
    bearing: f64,
    max_range: f64,
) -> f64 {
    let res = world.resolution();
    let origin = world.origin();
    let (dy, dx) = (state.yaw + bearing).sin_cos();
    // ray in cell units
    let mut px = (state.x - origin.x) / res;
    let mut py = (state.y - origin.y) / res;
    let (w, h) = (world.width() as f64, world.height() as f64);

    // clip the start onto the grid box when outside it
    let mut t_offset = 0.0;
    if !(px >= 0.0 && py >= 0.0 && px < w && py < h) {
        let Some(t) = slab_entry(px, py, dx, dy, w, h) else {
            return max_range;
        };
        t_offset = t + 1e-9;
        px += dx * t_offset;
        py += dy * t_offset;
    }

    let mut ix = px.floor() as i64;
    let mut iy = py.floor() as i64;
    let step_x: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_y: i64 = if dy > 0.0 { 1 } else { -1 };
    let t_delta_x = if dx != 0.0 { (1.0 / dx).abs() } else { f64::INFINITY };
    let t_delta_y = if dy != 0.0 { (1.0 / dy).abs() } else { f64::INFINITY };
    let mut t_max_x = if dx > 0.0 {
        (ix as f64 + 1.0 - px) / dx
    } else if dx < 0.0 {
        (px - ix as f64) / -dx
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy > 0.0 {
        (iy as f64 + 1.0 - py) / dy
    } else if dy < 0.0 {
        (py - iy as f64) / -dy
    } else {
        f64::INFINITY
    };

    let max_cells = max_range / res;
    let mut t_enter = t_offset;
    loop {
        let Some((cx, cy)) = world.cell_in_bounds(ix, iy) else {
            return max_range;
        };
        if t_enter > max_cells {
            return max_range;
        }
        if world.is_lethal(cx, cy) {
            return (t_enter * res).min(max_range);
        }
        if t_max_x < t_max_y {
            t_enter = t_offset + t_max_x;
            t_max_x += t_delta_x;
            ix += step_x;
        } else {
            t_enter = t_offset + t_max_y;
            t_max_y += t_delta_y;
            iy += step_y;
        }
    }
}

/// Ray parameter at which a ray from outside enters `[0,w)×[0,h)`.
fn slab_entry(px: f64, py: f64, dx: f64, dy: f64, w: f64, h: f64) -> Option<f64> {
    let mut t0 = 0.0f64;
    let mut t1 = f64::INFINITY;
    for (p, d, hi) in [(px, dx, w), (py, dy, h)] {
        if d == 0.0 {
            if p < 0.0 || p >= hi {
                return None;
            }
        } else {
            let a = (0.0 - p) / d;
            let b = (hi - p) / d;
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    (t0 <= t1).then_some(t0)
}
