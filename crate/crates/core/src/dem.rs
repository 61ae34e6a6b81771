//! LiDAR point gridding: fine-resolution minimum binning, block-minimum
//! aggregation to the working resolution, and hole filling.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{GeoTransform, Grid, DEFAULT_NODATA};

pub const DEFAULT_FINE_RESOLUTION: f64 = 0.10;
pub const DEFAULT_AGGREGATE_FACTOR: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub records: Vec<Point3>,
}

impl PointCloud {
    pub fn new(records: Vec<Point3>) -> Self {
        PointCloud { records }
    }

    /// Planar bounding box, `None` when empty.
    pub fn bounds(&self) -> Option<Extent> {
        let first = self.records.first()?;
        let mut e = Extent {
            min_x: first.x,
            min_y: first.y,
            max_x: first.x,
            max_y: first.y,
        };
        for p in &self.records[1..] {
            e.min_x = e.min_x.min(p.x);
            e.min_y = e.min_y.min(p.y);
            e.max_x = e.max_x.max(p.x);
            e.max_y = e.max_y.max(p.y);
        }
        Some(e)
    }
}

/// Reads `x y z` lines; blank lines and `#` comments are skipped.
pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let mut xyz = [0.0; 3];
        for (slot, f) in xyz.iter_mut().zip(&fields) {
            *slot = f
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: i + 1,
                    message: format!("bad coordinate {f:?}"),
                })?;
        }
        records.push(Point3 {
            x: xyz[0],
            y: xyz[1],
            z: xyz[2],
        });
    }
    Ok(PointCloud { records })
}

pub fn read_xyz(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_xyz(&text)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extent {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Extent {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Extent {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    fn is_degenerate(&self) -> bool {
        !(self.max_x > self.min_x && self.max_y > self.min_y)
            || ![self.min_x, self.min_y, self.max_x, self.max_y]
                .iter()
                .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemBuildConfig {
    pub fine_resolution: f64,
    pub aggregate_factor: usize,
    pub extent: Extent,
}

impl DemBuildConfig {
    pub fn new(extent: Extent) -> Self {
        DemBuildConfig {
            fine_resolution: DEFAULT_FINE_RESOLUTION,
            aggregate_factor: DEFAULT_AGGREGATE_FACTOR,
            extent,
        }
    }

    /// Extent snapped to the fine lattice so that every cloud point lands
    /// inside a half-open cell.
    pub fn covering(cloud: &PointCloud, fine_resolution: f64, aggregate_factor: usize) -> Result<Self> {
        let b = cloud.bounds().ok_or(Error::EmptyExtent)?;
        let r = fine_resolution;
        let min_x = (b.min_x / r).floor() * r;
        let min_y = (b.min_y / r).floor() * r;
        let cols = ((b.max_x - min_x) / r).floor() + 1.0;
        let rows = ((b.max_y - min_y) / r).floor() + 1.0;
        Ok(DemBuildConfig {
            fine_resolution,
            aggregate_factor,
            extent: Extent::new(min_x, min_y, min_x + cols * r, min_y + rows * r),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fine_resolution > 0.0 && self.fine_resolution.is_finite()) {
            return Err(Error::Config("fine resolution must be positive".into()));
        }
        if self.aggregate_factor == 0 {
            return Err(Error::Config("aggregate factor must be ≥ 1".into()));
        }
        if self.extent.is_degenerate() {
            return Err(Error::EmptyExtent);
        }
        Ok(())
    }

    /// Columns and rows of the fine lattice over the extent.
    pub fn fine_shape(&self) -> (usize, usize) {
        let r = self.fine_resolution;
        let e = &self.extent;
        // Tolerate representation noise such as 1.0 / 0.1 = 10.000000000000002.
        let n = |span: f64| ((span / r) - 1e-9).ceil().max(1.0) as usize;
        (n(e.max_x - e.min_x), n(e.max_y - e.min_y))
    }
}

/// Bins points into fine cells keeping the lowest elevation per cell.
///
/// Cells are half-open `[west, east) × [south, north)`; points outside the
/// extent are dropped and empty cells are nodata.
pub fn rasterize_points(cloud: &PointCloud, config: &DemBuildConfig) -> Result<Grid> {
    config.validate()?;
    let (width, height) = config.fine_shape();
    let e = &config.extent;
    let r = config.fine_resolution;
    let transform = GeoTransform::new(e.min_x, e.min_y, r)?;
    let mut grid = Grid::new(width, height, transform, DEFAULT_NODATA)?;
    for p in &cloud.records {
        if p.x < e.min_x || p.x >= e.max_x || p.y < e.min_y || p.y >= e.max_y {
            continue;
        }
        let col = ((p.x - e.min_x) / r).floor() as usize;
        let up = ((p.y - e.min_y) / r).floor() as usize;
        if col >= width || up >= height {
            continue;
        }
        let idx = (height - 1 - up) * width + col;
        let cur = grid.values[idx];
        if grid.is_nodata(cur) || p.z < cur {
            grid.values[idx] = p.z;
        }
    }
    Ok(grid)
}

/// Block minimum over `factor × factor` cells, ignoring nodata.
///
/// Blocks start at the north-west corner; partial blocks along the south and
/// east edges cover whatever cells exist, and the north edge stays fixed.
pub fn aggregate_min(grid: &Grid, factor: usize) -> Result<Grid> {
    if factor == 0 {
        return Err(Error::Config("aggregate factor must be ≥ 1".into()));
    }
    let out_w = grid.width.div_ceil(factor);
    let out_h = grid.height.div_ceil(factor);
    let cs = grid.transform.cell_size * factor as f64;
    let top = grid.transform.origin_y + grid.height as f64 * grid.transform.cell_size;
    let transform = GeoTransform::new(grid.transform.origin_x, top - out_h as f64 * cs, cs)?;
    let mut values = vec![grid.nodata; out_w * out_h];
    values
        .par_chunks_mut(out_w)
        .enumerate()
        .for_each(|(orow, out_row)| {
            let r0 = orow * factor;
            let r1 = (r0 + factor).min(grid.height);
            for (ocol, slot) in out_row.iter_mut().enumerate() {
                let c0 = ocol * factor;
                let c1 = (c0 + factor).min(grid.width);
                let mut best: Option<f64> = None;
                for r in r0..r1 {
                    for &v in &grid.values[r * grid.width + c0..r * grid.width + c1] {
                        if !grid.is_nodata(v) && best.is_none_or(|b| v < b) {
                            best = Some(v);
                        }
                    }
                }
                if let Some(b) = best {
                    *slot = b;
                }
            }
        });
    Grid::from_values(out_w, out_h, transform, grid.nodata, values)
}

/// Fills nodata cells by linear interpolation.
///
/// Each hole takes the straight-line value between the nearest valid cells
/// west and east of it in its row; failing a bracketing pair, north and south
/// in its column; failing that, the nearest valid cell by Euclidean distance
/// (ties to the smaller row, then column). Only original valid cells are
/// used as support, so the result does not depend on fill order.
pub fn fill_nodata_linear(grid: &Grid) -> Result<Grid> {
    let valid: Vec<bool> = grid.values.iter().map(|&v| !grid.is_nodata(v)).collect();
    if !valid.iter().any(|&v| v) {
        return Err(Error::AllNodata);
    }
    let w = grid.width;
    let mut out = grid.values.clone();
    out.par_chunks_mut(w).enumerate().for_each(|(row, out_row)| {
        for col in 0..w {
            if valid[row * w + col] {
                continue;
            }
            let v = along_row(grid, &valid, row, col)
                .or_else(|| along_col(grid, &valid, row, col))
                .unwrap_or_else(|| nearest_valid(grid, &valid, row, col));
            out_row[col] = v;
        }
    });
    Ok(grid.with_values(out))
}

fn lerp(a: f64, b: f64, offset: usize, span: usize) -> f64 {
    a + (b - a) * offset as f64 / span as f64
}

fn along_row(grid: &Grid, valid: &[bool], row: usize, col: usize) -> Option<f64> {
    let w = grid.width;
    let west = (0..col).rev().find(|&c| valid[row * w + c])?;
    let east = (col + 1..w).find(|&c| valid[row * w + c])?;
    Some(lerp(grid.get(row, west), grid.get(row, east), col - west, east - west))
}

fn along_col(grid: &Grid, valid: &[bool], row: usize, col: usize) -> Option<f64> {
    let w = grid.width;
    let north = (0..row).rev().find(|&r| valid[r * w + col])?;
    let south = (row + 1..grid.height).find(|&r| valid[r * w + col])?;
    Some(lerp(grid.get(north, col), grid.get(south, col), row - north, south - north))
}

/// Expanding square rings; a ring at Chebyshev radius `k` cannot hold a
/// cell nearer than `k`, so the search stops once `k² > best`.
fn nearest_valid(grid: &Grid, valid: &[bool], row: usize, col: usize) -> f64 {
    let (w, h) = (grid.width as isize, grid.height as isize);
    let (r0, c0) = (row as isize, col as isize);
    let mut best: Option<(isize, isize, isize)> = None; // (d², row, col)
    let max_k = w.max(h);
    for k in 1..=max_k {
        if let Some((d2, _, _)) = best {
            if k * k > d2 {
                break;
            }
        }
        for r in (r0 - k).max(0)..=(r0 + k).min(h - 1) {
            let on_edge_row = (r - r0).abs() == k;
            let cols: Vec<isize> = if on_edge_row {
                ((c0 - k).max(0)..=(c0 + k).min(w - 1)).collect()
            } else {
                [c0 - k, c0 + k].into_iter().filter(|&c| c >= 0 && c < w).collect()
            };
            for c in cols {
                if !valid[(r * w + c) as usize] {
                    continue;
                }
                let d2 = (r - r0).pow(2) + (c - c0).pow(2);
                if best.is_none_or(|b| (d2, r, c) < b) {
                    best = Some((d2, r, c));
                }
            }
        }
    }
    let (_, r, c) = best.expect("grid has at least one valid cell");
    grid.get(r as usize, c as usize)
}

/// Rasterize, aggregate and hole-fill in one pass.
pub fn build_dem(cloud: &PointCloud, config: &DemBuildConfig) -> Result<Grid> {
    let fine = rasterize_points(cloud, config)?;
    let coarse = aggregate_min(&fine, config.aggregate_factor)?;
    fill_nodata_linear(&coarse)
}
