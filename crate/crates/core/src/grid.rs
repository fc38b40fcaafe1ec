//! Occupancy grids and exact Euclidean distance fields over their lethal cells.

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

/// Cost at or above which a cell is an obstacle.
pub const LETHAL_COST: u8 = 254;

/// Row-major cost grid. Cell `(ix, iy)` spans
/// `[origin.x + ix·res, origin.x + (ix+1)·res) × [origin.y + iy·res, …)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Point,
    cost: Vec<u8>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Point) -> Self {
        assert!(resolution > 0.0, "grid resolution must be positive");
        Self {
            width,
            height,
            resolution,
            origin,
            cost: vec![0; width * height],
        }
    }

    /// Same geometry as `self`, all cells free.
    pub fn empty_like(&self) -> Self {
        Self::new(self.width, self.height, self.resolution, self.origin)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn costs(&self) -> &[u8] {
        &self.cost
    }

    pub fn costs_mut(&mut self) -> &mut [u8] {
        &mut self.cost
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.width + ix
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> u8 {
        self.cost[self.index(ix, iy)]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, iy: usize, cost: u8) {
        let i = self.index(ix, iy);
        self.cost[i] = cost;
    }

    #[inline]
    pub fn is_lethal(&self, ix: usize, iy: usize) -> bool {
        self.get(ix, iy) >= LETHAL_COST
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            self.origin.x + (ix as f64 + 0.5) * self.resolution,
            self.origin.y + (iy as f64 + 0.5) * self.resolution,
        )
    }

    /// Signed cell coordinates of a world point (may lie outside the grid).
    #[inline]
    pub fn world_to_cell_signed(&self, p: &Point) -> (i64, i64) {
        (
            ((p.x - self.origin.x) / self.resolution).floor() as i64,
            ((p.y - self.origin.y) / self.resolution).floor() as i64,
        )
    }

    #[inline]
    pub fn world_to_cell(&self, p: &Point) -> Option<(usize, usize)> {
        let (ix, iy) = self.world_to_cell_signed(p);
        self.cell_in_bounds(ix, iy)
    }

    #[inline]
    pub fn cell_in_bounds(&self, ix: i64, iy: i64) -> Option<(usize, usize)> {
        if ix >= 0 && iy >= 0 && (ix as usize) < self.width && (iy as usize) < self.height {
            Some((ix as usize, iy as usize))
        } else {
            None
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.world_to_cell(p).is_some()
    }

    /// Cost under a world point; points outside the grid read as free.
    #[inline]
    pub fn cost_at(&self, p: &Point) -> u8 {
        self.world_to_cell(p).map_or(0, |(ix, iy)| self.get(ix, iy))
    }

    pub fn width_m(&self) -> f64 {
        self.width as f64 * self.resolution
    }

    pub fn height_m(&self) -> f64 {
        self.height as f64 * self.resolution
    }

    pub fn lethal_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |iy| {
            (0..self.width).filter_map(move |ix| self.is_lethal(ix, iy).then_some((ix, iy)))
        })
    }

    pub fn lethal_count(&self) -> usize {
        self.cost.iter().filter(|&&c| c >= LETHAL_COST).count()
    }

    /// Inclusive cell-index box covering the disk of `radius` around `p`,
    /// clipped to the grid. `None` when the disk misses the grid entirely.
    pub fn cell_box(&self, p: &Point, radius: f64) -> Option<(usize, usize, usize, usize)> {
        let lo = self.world_to_cell_signed(&p.translated(-radius, -radius));
        let hi = self.world_to_cell_signed(&p.translated(radius, radius));
        let x0 = lo.0.max(0);
        let y0 = lo.1.max(0);
        let x1 = hi.0.min(self.width as i64 - 1);
        let y1 = hi.1.min(self.height as i64 - 1);
        if x0 > x1 || y0 > y1 {
            return None;
        }
        Some((x0 as usize, y0 as usize, x1 as usize, y1 as usize))
    }

    /// Distance from `p` to the nearest lethal cell center, if one lies
    /// within `radius`.
    pub fn nearest_lethal_within(&self, p: &Point, radius: f64) -> Option<f64> {
        let (x0, y0, x1, y1) = self.cell_box(p, radius)?;
        let mut best: Option<f64> = None;
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                if self.is_lethal(ix, iy) {
                    let d = self.cell_center(ix, iy).distance(p);
                    if d <= radius && best.is_none_or(|b| d < b) {
                        best = Some(d);
                    }
                }
            }
        }
        best
    }
}

/// Squared distance (in cell units) from each cell center to the nearest
/// lethal cell center, by exhaustive search. `f64::INFINITY` when the grid
/// has no lethal cells.
pub fn squared_distance_brute_force(grid: &OccupancyGrid) -> Vec<f64> {
    let lethal: Vec<(usize, usize)> = grid.lethal_cells().collect();
    let mut out = vec![f64::INFINITY; grid.width() * grid.height()];
    for iy in 0..grid.height() {
        for ix in 0..grid.width() {
            let mut best = f64::INFINITY;
            for &(lx, ly) in &lethal {
                let dx = ix as f64 - lx as f64;
                let dy = iy as f64 - ly as f64;
                best = best.min(dx * dx + dy * dy);
            }
            out[grid.index(ix, iy)] = best;
        }
    }
    out
}

/// Exact squared Euclidean distance transform (separable lower envelope of
/// parabolas): one pass down the columns, one pass along the rows.
pub fn squared_distance_transform(grid: &OccupancyGrid) -> Vec<f64> {
    let (w, h) = (grid.width(), grid.height());
    let mut field: Vec<f64> = grid
        .costs()
        .iter()
        .map(|&c| if c >= LETHAL_COST { 0.0 } else { f64::INFINITY })
        .collect();
    let mut scratch = Envelope::with_capacity(w.max(h));

    let mut column = vec![0.0; h];
    for ix in 0..w {
        for iy in 0..h {
            column[iy] = field[iy * w + ix];
        }
        scratch.transform(&mut column);
        for iy in 0..h {
            field[iy * w + ix] = column[iy];
        }
    }
    for row in field.chunks_mut(w) {
        scratch.transform(row);
    }
    field
}

struct Envelope {
    vertices: Vec<usize>,
    bounds: Vec<f64>,
    input: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Self {
            vertices: vec![0; n],
            bounds: vec![0.0; n + 1],
            input: vec![0.0; n],
        }
    }

    /// In-place 1D squared distance transform of `f`.
    fn transform(&mut self, f: &mut [f64]) {
        let n = f.len();
        self.input[..n].copy_from_slice(f);
        let input = &self.input;
        let v = &mut self.vertices;
        let z = &mut self.bounds;

        let Some(first) = (0..n).find(|&q| input[q].is_finite()) else {
            return;
        };
        let mut k = 0usize;
        v[0] = first;
        z[0] = f64::NEG_INFINITY;
        z[1] = f64::INFINITY;
        for q in first + 1..n {
            if !input[q].is_finite() {
                continue;
            }
            let qf = q as f64;
            // z[0] = -inf keeps k from underflowing
            let s = loop {
                let pf = v[k] as f64;
                let s = ((input[q] + qf * qf) - (input[v[k]] + pf * pf)) / (2.0 * (qf - pf));
                if s <= z[k] {
                    k -= 1;
                } else {
                    break s;
                }
            };
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
        }
        let mut k = 0usize;
        for (q, out) in f.iter_mut().enumerate() {
            let qf = q as f64;
            while z[k + 1] < qf {
                k += 1;
            }
            let p = v[k] as f64;
            *out = (qf - p) * (qf - p) + input[v[k]];
        }
    }
}

/// Distance in meters from each cell center to the nearest lethal cell center.
pub fn distance_field_m(grid: &OccupancyGrid) -> Vec<f64> {
    squared_distance_transform(grid)
        .into_iter()
        .map(|d2| d2.sqrt() * grid.resolution())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid_from_bits(w: usize, h: usize, bits: &[bool]) -> OccupancyGrid {
        let mut g = OccupancyGrid::new(w, h, 0.1, Point::new(0.0, 0.0));
        for (i, &b) in bits.iter().enumerate() {
            if b {
                g.costs_mut()[i] = LETHAL_COST;
            }
        }
        g
    }

    #[test]
    fn cell_mapping_round_trips() {
        let g = OccupancyGrid::new(10, 5, 0.2, Point::new(-1.0, 2.0));
        let c = g.cell_center(3, 4);
        assert_eq!(g.world_to_cell(&c), Some((3, 4)));
        assert_eq!(g.world_to_cell(&Point::new(-1.01, 2.5)), None);
        assert_eq!(g.cost_at(&Point::new(100.0, 0.0)), 0);
    }

    #[test]
    fn transform_of_empty_grid_is_infinite() {
        let g = OccupancyGrid::new(4, 3, 0.1, Point::default());
        assert!(squared_distance_transform(&g).iter().all(|d| d.is_infinite()));
    }

    #[test]
    fn single_lethal_cell_distances() {
        let mut g = OccupancyGrid::new(5, 5, 0.1, Point::default());
        g.set(2, 2, LETHAL_COST);
        let d = squared_distance_transform(&g);
        assert_eq!(d[g.index(2, 2)], 0.0);
        assert_eq!(d[g.index(0, 0)], 8.0);
        assert_eq!(d[g.index(4, 2)], 4.0);
    }

    #[test]
    fn nearest_lethal_within_radius() {
        let mut g = OccupancyGrid::new(20, 20, 0.1, Point::default());
        g.set(10, 10, LETHAL_COST);
        let p = Point::new(0.75, 1.05);
        let d = g.nearest_lethal_within(&p, 0.5).unwrap();
        assert!((d - 0.3).abs() < 1e-12);
        assert!(g.nearest_lethal_within(&p, 0.29).is_none());
    }

    proptest! {
        #[test]
        fn transform_matches_brute_force(
            (w, h, bits) in (1usize..24, 1usize..24)
                .prop_flat_map(|(w, h)| (Just(w), Just(h), proptest::collection::vec(proptest::bool::weighted(0.1), w * h)))
        ) {
            let g = grid_from_bits(w, h, &bits);
            prop_assert_eq!(squared_distance_transform(&g), squared_distance_brute_force(&g));
        }
    }
}
