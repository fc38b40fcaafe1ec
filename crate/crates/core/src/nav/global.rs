use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::grid::{OccupancyGrid, LETHAL_COST};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalPlannerConfig {
    /// Scales how strongly inflated cost lengthens a step.
    pub cost_weight: f64,
}

impl Default for GlobalPlannerConfig {
    fn default() -> Self {
        GlobalPlannerConfig { cost_weight: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("start is outside the grid")]
    StartOutside,
    #[error("goal is outside the grid")]
    GoalOutside,
    #[error("start cell is lethal")]
    StartBlocked,
    #[error("goal cell is lethal")]
    GoalBlocked,
    #[error("goal unreachable")]
    NoPath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalPlan {
    /// Cell centers from the start cell to the goal cell.
    pub points: Vec<Point>,
    pub cells: Vec<(usize, usize)>,
    /// Geometric length of the polyline, meters.
    pub length_m: f64,
    /// Accumulated weighted traversal cost.
    pub cost: f64,
}

const NEIGHBORS: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Weighted cost of moving from `(ix, iy)` by `(dx, dy)`, or `None` when the
/// move leaves the grid, enters a lethal cell, or cuts a lethal corner.
/// Entering a cell costs `step · (1 + cost/254 · w)` using the target cell.
pub(crate) fn move_cost(
    grid: &OccupancyGrid,
    ix: usize,
    iy: usize,
    dx: i64,
    dy: i64,
    cost_weight: f64,
) -> Option<(usize, usize, f64)> {
    let (nx, ny) = grid.cell_in_bounds(ix as i64 + dx, iy as i64 + dy)?;
    if grid.is_lethal(nx, ny) {
        return None;
    }
    if dx != 0 && dy != 0 && (grid.is_lethal(nx, iy) || grid.is_lethal(ix, ny)) {
        return None;
    }
    let step = if dx != 0 && dy != 0 {
        std::f64::consts::SQRT_2 * grid.resolution()
    } else {
        grid.resolution()
    };
    let c = grid.get(nx, ny) as f64 / LETHAL_COST as f64;
    Some((nx, ny, step * (1.0 + c * cost_weight)))
}

/// Dijkstra over the 8-connected grid. Among equal-cost frontier cells the
/// one with the lower (row, column) is expanded first.
pub fn plan_global(
    grid: &OccupancyGrid,
    start: &Point,
    goal: &Point,
    config: &GlobalPlannerConfig,
) -> Result<GlobalPlan, PlanError> {
    let (sx, sy) = grid.world_to_cell(start).ok_or(PlanError::StartOutside)?;
    let (gx, gy) = grid.world_to_cell(goal).ok_or(PlanError::GoalOutside)?;
    if grid.is_lethal(sx, sy) {
        return Err(PlanError::StartBlocked);
    }
    if grid.is_lethal(gx, gy) {
        return Err(PlanError::GoalBlocked);
    }
    let n = grid.width() * grid.height();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    let start_idx = grid.index(sx, sy);
    let goal_idx = grid.index(gx, gy);
    dist[start_idx] = 0.0;
    heap.push(Reverse((OrderedFloat(0.0), sy, sx)));

    while let Some(Reverse((OrderedFloat(d), iy, ix))) = heap.pop() {
        let idx = grid.index(ix, iy);
        if done[idx] {
            continue;
        }
        done[idx] = true;
        if idx == goal_idx {
            break;
        }
        for (dx, dy) in NEIGHBORS {
            let Some((nx, ny, c)) = move_cost(grid, ix, iy, dx, dy, config.cost_weight) else {
                continue;
            };
            let nidx = grid.index(nx, ny);
            let nd = d + c;
            if !done[nidx] && nd < dist[nidx] {
                dist[nidx] = nd;
                parent[nidx] = idx;
                heap.push(Reverse((OrderedFloat(nd), ny, nx)));
            }
        }
    }
    if !done[goal_idx] {
        return Err(PlanError::NoPath);
    }

    let mut cells = vec![(gx, gy)];
    let mut idx = goal_idx;
    while idx != start_idx {
        idx = parent[idx];
        cells.push((idx % grid.width(), idx / grid.width()));
    }
    cells.reverse();
    let points: Vec<Point> = cells.iter().map(|&(x, y)| grid.cell_center(x, y)).collect();
    let length_m = points.windows(2).map(|w| w[0].distance(&w[1])).sum();
    Ok(GlobalPlan {
        points,
        cells,
        length_m,
        cost: dist[goal_idx],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: usize, h: usize) -> OccupancyGrid {
        OccupancyGrid::new(w, h, 0.1, Point::default())
    }

    #[test]
    fn straight_row_path() {
        let g = grid(20, 10);
        let plan = plan_global(
            &g,
            &g.cell_center(2, 5),
            &g.cell_center(12, 5),
            &GlobalPlannerConfig::default(),
        )
        .unwrap();
        assert!((plan.length_m - 1.0).abs() < 1e-12);
        assert_eq!(plan.cells.len(), 11);
        assert!(plan.cells.iter().all(|&(_, y)| y == 5));
        assert_eq!(plan.points[0], g.cell_center(2, 5));
        assert_eq!(*plan.points.last().unwrap(), g.cell_center(12, 5));
    }

    #[test]
    fn sealed_goal_has_no_path() {
        let mut g = grid(15, 15);
        for i in 5..=9 {
            for (x, y) in [(i, 5), (i, 9), (5, i), (9, i)] {
                g.set(x, y, LETHAL_COST);
            }
        }
        let r = plan_global(
            &g,
            &g.cell_center(1, 1),
            &g.cell_center(7, 7),
            &GlobalPlannerConfig::default(),
        );
        assert_eq!(r, Err(PlanError::NoPath));
    }

    #[test]
    fn blocked_endpoints() {
        let mut g = grid(5, 5);
        g.set(0, 0, LETHAL_COST);
        let cfg = GlobalPlannerConfig::default();
        let free = g.cell_center(4, 4);
        let blocked = g.cell_center(0, 0);
        assert_eq!(plan_global(&g, &blocked, &free, &cfg), Err(PlanError::StartBlocked));
        assert_eq!(plan_global(&g, &free, &blocked, &cfg), Err(PlanError::GoalBlocked));
        assert_eq!(
            plan_global(&g, &Point::new(-1.0, 0.0), &free, &cfg),
            Err(PlanError::StartOutside)
        );
    }

    #[test]
    fn consecutive_cells_are_adjacent() {
        let mut g = grid(30, 30);
        for y in 0..25 {
            g.set(15, y, LETHAL_COST);
        }
        for x in 0..30 {
            g.set(x, 27, 120);
        }
        let plan = plan_global(
            &g,
            &g.cell_center(2, 2),
            &g.cell_center(28, 3),
            &GlobalPlannerConfig { cost_weight: 2.0 },
        )
        .unwrap();
        for w in plan.cells.windows(2) {
            let dx = w[0].0.abs_diff(w[1].0);
            let dy = w[0].1.abs_diff(w[1].1);
            assert!(dx <= 1 && dy <= 1 && dx + dy > 0);
        }
        assert!(plan.cells.iter().all(|&(x, y)| !g.is_lethal(x, y)));
    }

    #[test]
    fn inflated_cost_pushes_path_away() {
        let mut g = grid(20, 9);
        // a costly band on row 4 between start and goal
        for x in 3..17 {
            g.set(x, 4, 200);
        }
        let cfg = GlobalPlannerConfig { cost_weight: 5.0 };
        let plan = plan_global(&g, &g.cell_center(1, 4), &g.cell_center(18, 4), &cfg).unwrap();
        assert!(plan.cells.iter().filter(|&&(_, y)| y == 4).count() < 5);
    }
}
