//! Terrain drainage analysis on a DEM: depression filling, D8 routing,
//! contributing-area accumulation, watershed labels and stream vectors.

mod accumulation;
mod fill;
mod flowdir;
mod network;

pub use accumulation::{compute_flow_accumulation, label_watersheds, topological_order};
pub use fill::{fill_depressions, fill_depressions_with, is_drainage_boundary, DEFAULT_FILL_EPSILON};
pub use flowdir::{compute_flow_direction, Direction, FlowDirGrid};
pub use network::{vectorize_network, NodeKind, StreamLink, StreamNetwork, StreamNode};

use crate::raster::Grid;

/// Contributing-cell counts (self-inclusive, so every valid cell is ≥ 1).
pub type AccumGrid = Grid;

/// Integer outlet labels starting at 1.
pub type WatershedLabels = Grid;

/// Neighbour offsets `(drow, dcol)` in tie-break order E, SE, S, SW, W, NW, N, NE.
pub(crate) const D8_OFFSETS: [(isize, isize); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
];

#[inline]
pub(crate) fn neighbour(grid_w: usize, grid_h: usize, idx: usize, k: usize) -> Option<usize> {
    let (dr, dc) = D8_OFFSETS[k];
    let r = (idx / grid_w) as isize + dr;
    let c = (idx % grid_w) as isize + dc;
    if r < 0 || c < 0 || r >= grid_h as isize || c >= grid_w as isize {
        None
    } else {
        Some(r as usize * grid_w + c as usize)
    }
}
