use crate::geometry::Point;
use crate::grid::{OccupancyGrid, LETHAL_COST};
use crate::gridworld::{advance_moving_obstacles, ScenarioSpec, StaticObstacle};

/// Empty grid with the scenario's geometry.
pub fn grid_for(spec: &ScenarioSpec) -> OccupancyGrid {
    OccupancyGrid::new(
        spec.width_cells,
        spec.height_cells,
        spec.resolution_m,
        spec.origin(),
    )
}

/// Lethal-only grid at time `t`: static obstacles present by `t` and moving
/// obstacles at their scheduled positions.
pub fn rasterize(spec: &ScenarioSpec, t: f64) -> OccupancyGrid {
    rasterize_at(spec, t, &advance_moving_obstacles(spec, t))
}

/// Like [`rasterize`] but with explicit mover centers (the simulator passes
/// halted positions here).
pub fn rasterize_at(spec: &ScenarioSpec, t: f64, mover_centers: &[Point]) -> OccupancyGrid {
    let mut grid = grid_for(spec);
    for ob in spec.static_obstacles.iter().filter(|o| o.is_present(t)) {
        mark(&mut grid, ob);
    }
    for (m, c) in spec.moving_obstacles.iter().zip(mover_centers) {
        mark(&mut grid, &StaticObstacle::circle(*c, m.radius_m));
    }
    grid
}

/// Marks every cell whose center lies inside the shape.
fn mark(grid: &mut OccupancyGrid, ob: &StaticObstacle) {
    let (lo, hi) = ob.bounds();
    let lo_cell = grid.world_to_cell_signed(&lo);
    let hi_cell = grid.world_to_cell_signed(&hi);
    let x0 = lo_cell.0.max(0);
    let y0 = lo_cell.1.max(0);
    let x1 = hi_cell.0.min(grid.width() as i64 - 1);
    let y1 = hi_cell.1.min(grid.height() as i64 - 1);
    for iy in y0..=y1 {
        for ix in x0..=x1 {
            let (ix, iy) = (ix as usize, iy as usize);
            if ob.contains(&grid.cell_center(ix, iy)) {
                grid.set(ix, iy, LETHAL_COST);
            }
        }
    }
}
