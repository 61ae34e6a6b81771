//! Carries contributing area from a coarse regional network into a fine
//! survey grid as accumulation seeds on the fine grid's outer ring.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hydrology::StreamNetwork;
use crate::raster::{CellIndex, Grid, GridFrame};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InletSeed {
    pub cell: CellIndex,
    /// Upstream area in fine-cell units.
    pub accumulation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Rect {
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
}

impl Rect {
    fn from_frame(f: &GridFrame) -> Rect {
        let (min_x, min_y, max_x, max_y) = f.bounds();
        Rect {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    fn contains(&self, (x, y): (f64, f64)) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }

    fn overlaps(&self, o: &Rect) -> bool {
        self.min_x < o.max_x && o.min_x < self.max_x && self.min_y < o.max_y && o.min_y < self.max_y
    }

    /// First point where the segment `a → b` (with `a` outside) enters the
    /// rectangle, by Liang–Barsky clipping.
    fn entry_point(&self, a: (f64, f64), b: (f64, f64)) -> Option<(f64, f64)> {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for (p, q) in [
            (-dx, a.0 - self.min_x),
            (dx, self.max_x - a.0),
            (-dy, a.1 - self.min_y),
            (dy, self.max_y - a.1),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return None;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        (t0 <= t1).then_some((a.0 + t0 * dx, a.1 + t0 * dy))
    }
}

/// Seeds for every place a coarse stream link enters the fine grid.
///
/// A link qualifies when its head accumulation is at least `min_accum`. Each
/// outside-to-inside step along its cell-centre polyline yields one seed on
/// the fine boundary cell nearest the crossing point (ties to the smaller
/// row, then column). The seed carries the link's head accumulation converted
/// to fine cells by the squared cell-size ratio.
pub fn derive_inlet_seeds(
    network: &StreamNetwork,
    coarse: &GridFrame,
    fine: &Grid,
    min_accum: f64,
) -> Result<Vec<InletSeed>> {
    let fine_frame = fine.frame();
    let fine_rect = Rect::from_frame(&fine_frame);
    if !Rect::from_frame(coarse).overlaps(&fine_rect) {
        return Err(Error::NoOverlap);
    }
    let scale = (coarse.transform.cell_size / fine.transform.cell_size).powi(2);
    let ring = boundary_ring(fine);

    let mut seeds = Vec::new();
    for link in &network.links {
        if link.head_accumulation < min_accum {
            continue;
        }
        for pair in link.cells.windows(2) {
            let a = coarse.cell_center(pair[0].row, pair[0].col);
            let b = coarse.cell_center(pair[1].row, pair[1].col);
            if fine_rect.contains(a) || !fine_rect.contains(b) {
                continue;
            }
            let Some(p) = fine_rect.entry_point(a, b) else { continue };
            let Some(cell) = nearest_ring_cell(&fine_frame, &ring, p) else {
                continue;
            };
            seeds.push(InletSeed {
                cell,
                accumulation: link.head_accumulation * scale,
            });
        }
    }
    Ok(seeds)
}

fn boundary_ring(fine: &Grid) -> Vec<CellIndex> {
    (0..fine.height)
        .flat_map(|r| (0..fine.width).map(move |c| CellIndex::new(r, c)))
        .filter(|c| fine.is_edge(c.row, c.col) && fine.is_valid_at(fine.index(c.row, c.col)))
        .collect()
}

fn nearest_ring_cell(frame: &GridFrame, ring: &[CellIndex], p: (f64, f64)) -> Option<CellIndex> {
    ring.iter()
        .map(|&c| {
            let (x, y) = frame.cell_center(c.row, c.col);
            ((x - p.0).powi(2) + (y - p.1).powi(2), c)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, c)| c)
}

/// `row col accumulation` per line.
pub fn format_seeds(seeds: &[InletSeed]) -> String {
    let mut out = String::new();
    for s in seeds {
        let _ = writeln!(out, "{} {} {}", s.cell.row, s.cell.col, s.accumulation);
    }
    out
}

pub fn parse_seeds(text: &str) -> Result<Vec<InletSeed>> {
    let mut seeds = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::Parse {
            line: i + 1,
            message,
        };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(bad(format!("expected `row col accumulation`, found {} fields", f.len())));
        }
        let row = f[0].parse().map_err(|_| bad(format!("bad row {:?}", f[0])))?;
        let col = f[1].parse().map_err(|_| bad(format!("bad col {:?}", f[1])))?;
        let accumulation: f64 = f[2].parse().map_err(|_| bad(format!("bad accumulation {:?}", f[2])))?;
        if !(accumulation >= 0.0 && accumulation.is_finite()) {
            return Err(bad(format!("accumulation must be ≥ 0, got {accumulation}")));
        }
        seeds.push(InletSeed {
            cell: CellIndex::new(row, col),
            accumulation,
        });
    }
    Ok(seeds)
}

pub fn write_seeds(seeds: &[InletSeed], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_seeds(seeds)).map_err(|e| Error::io(path, e))
}

pub fn read_seeds(path: impl AsRef<Path>) -> Result<Vec<InletSeed>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_seeds(&text)
}

/// Seeds as `(cell, amount)` pairs for [`crate::hydrology::compute_flow_accumulation`].
pub fn as_accumulation_seeds(seeds: &[InletSeed]) -> Vec<(CellIndex, f64)> {
    seeds.iter().map(|s| (s.cell, s.accumulation)).collect()
}
