use std::f64::consts::SQRT_2;

use super::fill::is_drainage_boundary;
use super::{neighbour, D8_OFFSETS};
use crate::error::{Error, Result};
use crate::raster::{CellIndex, Grid, GridFrame};

/// D8 drainage direction of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    E,
    SE,
    S,
    SW,
    W,
    NW,
    N,
    NE,
    Outlet,
    Nodata,
}

impl Direction {
    pub const NEIGHBOURS: [Direction; 8] = [
        Direction::E,
        Direction::SE,
        Direction::S,
        Direction::SW,
        Direction::W,
        Direction::NW,
        Direction::N,
        Direction::NE,
    ];

    /// Index into the E..NE neighbour order.
    pub fn slot(self) -> Option<usize> {
        Self::NEIGHBOURS.iter().position(|&d| d == self)
    }

    pub fn offset(self) -> Option<(isize, isize)> {
        self.slot().map(|k| D8_OFFSETS[k])
    }

    /// Power-of-two pointer code (E = 1 … NE = 128), 0 for outlets.
    /// Nodata has no code.
    pub fn code(self) -> Option<u8> {
        match self {
            Direction::Outlet => Some(0),
            Direction::Nodata => None,
            d => Some(1u8 << d.slot().unwrap()),
        }
    }

    pub fn from_code(code: f64) -> Option<Direction> {
        if code == 0.0 {
            return Some(Direction::Outlet);
        }
        Self::NEIGHBOURS
            .iter()
            .copied()
            .find(|d| d.code().map(f64::from) == Some(code))
    }
}

/// Per-cell drainage direction plus the drop/distance ratio toward it.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDirGrid {
    pub frame: GridFrame,
    pub directions: Vec<Direction>,
    /// Dimensionless; 0 at outlets, nodata where the DEM is nodata.
    pub steepness: Grid,
}

impl FlowDirGrid {
    pub fn width(&self) -> usize {
        self.frame.width
    }

    pub fn height(&self) -> usize {
        self.frame.height
    }

    pub fn nodata(&self) -> f64 {
        self.steepness.nodata
    }

    pub fn direction(&self, row: usize, col: usize) -> Direction {
        self.directions[row * self.frame.width + col]
    }

    /// Index of the cell `idx` drains into, if any.
    #[inline]
    pub fn downstream(&self, idx: usize) -> Option<usize> {
        let k = self.directions[idx].slot()?;
        neighbour(self.frame.width, self.frame.height, idx, k)
    }

    pub fn downstream_cell(&self, cell: CellIndex) -> Option<CellIndex> {
        let w = self.frame.width;
        self.downstream(cell.row * w + cell.col)
            .map(|j| CellIndex::new(j / w, j % w))
    }

    /// Encodes directions as pointer codes (see [`Direction::code`]).
    pub fn to_code_grid(&self) -> Grid {
        let nodata = self.nodata();
        let values = self
            .directions
            .iter()
            .map(|d| d.code().map_or(nodata, f64::from))
            .collect();
        self.steepness.with_values(values)
    }

    /// Rebuilds directions from a pointer-code grid. Steepness is not stored
    /// in that format and comes back as 0 on every valid cell.
    pub fn from_code_grid(codes: &Grid) -> Result<FlowDirGrid> {
        let mut directions = Vec::with_capacity(codes.len());
        let mut steep = Vec::with_capacity(codes.len());
        for (i, &v) in codes.values.iter().enumerate() {
            if codes.is_nodata(v) {
                directions.push(Direction::Nodata);
                steep.push(codes.nodata);
                continue;
            }
            let d = Direction::from_code(v).ok_or_else(|| Error::Token {
                token: v.to_string(),
                position: i,
            })?;
            if let Some(k) = d.slot() {
                let target = neighbour(codes.width, codes.height, i, k);
                if target.is_none_or(|j| !codes.is_valid_at(j)) {
                    return Err(Error::Config(format!(
                        "cell {} drains off the grid or into nodata",
                        i
                    )));
                }
            }
            directions.push(d);
            steep.push(0.0);
        }
        Ok(FlowDirGrid {
            frame: codes.frame(),
            directions,
            steepness: codes.with_values(steep),
        })
    }
}

/// Steepest-descent D8 direction for every cell of a depression-filled DEM.
///
/// Slope is drop over centre-to-centre distance; ties keep the earlier
/// direction in E, SE, S, SW, W, NW, N, NE order. Cells without a strictly
/// lower neighbour are outlets when they sit on the drainage boundary and an
/// error otherwise.
pub fn compute_flow_direction(filled: &Grid) -> Result<FlowDirGrid> {
    let (w, h) = (filled.width, filled.height);
    let cs = filled.transform.cell_size;
    let dist = [cs, cs * SQRT_2, cs, cs * SQRT_2, cs, cs * SQRT_2, cs, cs * SQRT_2];
    let mut directions = vec![Direction::Nodata; filled.len()];
    let mut steep = vec![filled.nodata; filled.len()];
    for i in 0..filled.len() {
        if !filled.is_valid_at(i) {
            continue;
        }
        let z = filled.values[i];
        let mut best: Option<(usize, f64)> = None;
        for (k, d) in dist.iter().enumerate() {
            let Some(j) = neighbour(w, h, i, k) else { continue };
            if !filled.is_valid_at(j) {
                continue;
            }
            let drop = z - filled.values[j];
            if drop > 0.0 {
                let slope = drop / d;
                if best.is_none_or(|(_, s)| slope > s) {
                    best = Some((k, slope));
                }
            }
        }
        match best {
            Some((k, s)) => {
                directions[i] = Direction::NEIGHBOURS[k];
                steep[i] = s;
            }
            None if is_drainage_boundary(filled, i) => {
                directions[i] = Direction::Outlet;
                steep[i] = 0.0;
            }
            None => return Err(Error::Undrained(filled.cell_of(i))),
        }
    }
    Ok(FlowDirGrid {
        frame: filled.frame(),
        directions,
        steepness: filled.with_values(steep),
    })
}
