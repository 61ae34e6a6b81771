use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::neighbour;
use crate::error::{Error, Result};
use crate::raster::Grid;

/// Increment applied per step across flats so that every filled cell ends
/// up strictly above the cell it drains to.
pub const DEFAULT_FILL_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Elev(f64);

impl Eq for Elev {}

impl PartialOrd for Elev {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Elev {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// True for valid cells on the grid edge or touching a nodata cell; these
/// are the cells where water may leave the modelled surface.
pub fn is_drainage_boundary(grid: &Grid, idx: usize) -> bool {
    if !grid.is_valid_at(idx) {
        return false;
    }
    let (r, c) = (idx / grid.width, idx % grid.width);
    if grid.is_edge(r, c) {
        return true;
    }
    (0..8).any(|k| {
        neighbour(grid.width, grid.height, idx, k).is_some_and(|j| !grid.is_valid_at(j))
    })
}

/// Priority-flood depression filling with an epsilon gradient on flats.
pub fn fill_depressions(dem: &Grid) -> Result<Grid> {
    fill_depressions_with(dem, DEFAULT_FILL_EPSILON)
}

/// Priority-flood from the drainage boundary inward.
///
/// With `epsilon = 0` the result is exactly the spill elevation of each cell
/// (the lowest possible maximum along any path to the boundary). With a
/// positive epsilon each cell raised onto a flat is placed strictly above the
/// neighbour that reached it, so every non-boundary cell has a lower
/// neighbour. Heap ties are broken by cell index, keeping the output
/// deterministic.
pub fn fill_depressions_with(dem: &Grid, epsilon: f64) -> Result<Grid> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!("epsilon must be ≥ 0, got {epsilon}")));
    }
    let (w, h) = (dem.width, dem.height);
    let n = dem.len();
    let mut filled = dem.values.clone();
    let mut visited = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(Elev, usize)>> = BinaryHeap::new();

    for (i, seen) in visited.iter_mut().enumerate() {
        if !dem.is_valid_at(i) {
            *seen = true;
        } else if is_drainage_boundary(dem, i) {
            *seen = true;
            heap.push(Reverse((Elev(filled[i]), i)));
        }
    }
    if heap.is_empty() {
        return Err(Error::AllNodata);
    }

    while let Some(Reverse((Elev(level), i))) = heap.pop() {
        for k in 0..8 {
            let Some(j) = neighbour(w, h, i, k) else { continue };
            if visited[j] {
                continue;
            }
            visited[j] = true;
            if filled[j] <= level {
                filled[j] = raise(level, epsilon);
            }
            heap.push(Reverse((Elev(filled[j]), j)));
        }
    }
    Ok(dem.with_values(filled))
}

fn raise(level: f64, epsilon: f64) -> f64 {
    if epsilon == 0.0 {
        return level;
    }
    let v = level + epsilon;
    if v > level {
        v
    } else {
        level.next_up()
    }
}
