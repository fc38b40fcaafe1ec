use serde::{Deserialize, Serialize};

use crate::grid::{
    squared_distance_brute_force, squared_distance_transform, OccupancyGrid, LETHAL_COST,
};

/// Cost of a cell on the inscribed boundary; decays outward from here.
const INSCRIBED_BOUNDARY_COST: f64 = 253.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InflationParams {
    /// Exponential decay rate, 1/m.
    pub cost_scaling_factor: f64,
    pub inflation_radius_m: f64,
    pub inscribed_radius_m: f64,
}

impl Default for InflationParams {
    fn default() -> Self {
        Self {
            cost_scaling_factor: 1.5,
            inflation_radius_m: 1.0,
            inscribed_radius_m: 0.25,
        }
    }
}

impl InflationParams {
    pub fn validate(&self) -> Result<(), String> {
        let ok = self.cost_scaling_factor >= 0.0
            && self.inflation_radius_m >= 0.0
            && self.inscribed_radius_m >= 0.0
            && self.inflation_radius_m >= self.inscribed_radius_m;
        if ok {
            Ok(())
        } else {
            Err(format!("invalid inflation parameters {self:?}"))
        }
    }
}

/// Inflated cost for a cell `distance_m` from the nearest lethal cell, or
/// `None` when the cell is beyond the inflation radius.
///
/// Cells strictly inside the inscribed radius are lethal; from the inscribed
/// boundary outward the cost decays as `253·exp(-k·(d - r_inscribed))`.
pub fn inflation_cost(distance_m: f64, params: &InflationParams) -> Option<u8> {
    if distance_m < params.inscribed_radius_m {
        Some(LETHAL_COST)
    } else if distance_m <= params.inflation_radius_m {
        let decay = (-params.cost_scaling_factor * (distance_m - params.inscribed_radius_m)).exp();
        Some((INSCRIBED_BOUNDARY_COST * decay).round() as u8)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMethod {
    BruteForce,
    Transform,
}

/// Grids whose (cells × lethal cells) product stays under this use the
/// exhaustive distance computation.
const BRUTE_FORCE_WORK_LIMIT: usize = 1 << 20;

pub fn inflate(grid: &OccupancyGrid, params: &InflationParams) -> OccupancyGrid {
    let work = grid.width() * grid.height() * grid.lethal_count();
    let method = if work <= BRUTE_FORCE_WORK_LIMIT {
        DistanceMethod::BruteForce
    } else {
        DistanceMethod::Transform
    };
    inflate_with(grid, params, method)
}

pub fn inflate_with(
    grid: &OccupancyGrid,
    params: &InflationParams,
    method: DistanceMethod,
) -> OccupancyGrid {
    let squared = match method {
        DistanceMethod::BruteForce => squared_distance_brute_force(grid),
        DistanceMethod::Transform => squared_distance_transform(grid),
    };
    let mut out = grid.clone();
    let res = grid.resolution();
    for (cost, d2) in out.costs_mut().iter_mut().zip(squared) {
        if d2 == 0.0 || d2.is_infinite() {
            continue;
        }
        if let Some(c) = inflation_cost(d2.sqrt() * res, params) {
            *cost = (*cost).max(c);
        }
    }
    out
}
