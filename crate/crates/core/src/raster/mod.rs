//! Georeferenced raster container shared by every stage of the pipeline.
//!
//! Rows run north to south (row 0 is the top of the map) while the origin of
//! the [`GeoTransform`] is the lower-left corner, the same convention as the
//! ASCII-grid exchange format.

mod ascii;
mod render;

pub use ascii::{read_ascii_grid, write_ascii_grid, parse_ascii_grid, format_ascii_grid};
pub use render::{falsecolor_pixel, render_falsecolor, falsecolor_ppm};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default sentinel used when a grid is created without an explicit one.
pub const DEFAULT_NODATA: f64 = -9999.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoTransform {
    /// x of the lower-left corner, metres.
    pub origin_x: f64,
    /// y of the lower-left corner, metres.
    pub origin_y: f64,
    /// Side of a square cell, metres.
    pub cell_size: f64,
}

impl GeoTransform {
    pub fn new(origin_x: f64, origin_y: f64, cell_size: f64) -> Result<Self> {
        let t = GeoTransform {
            origin_x,
            origin_y,
            cell_size,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(Error::Config(format!(
                "cell size must be positive and finite, got {}",
                self.cell_size
            )));
        }
        if !self.origin_x.is_finite() || !self.origin_y.is_finite() {
            return Err(Error::Config("origin must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

impl CellIndex {
    pub const fn new(row: usize, col: usize) -> Self {
        CellIndex { row, col }
    }
}

/// Shape and placement of a grid without its values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridFrame {
    pub width: usize,
    pub height: usize,
    pub transform: GeoTransform,
}

impl GridFrame {
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        let cs = self.transform.cell_size;
        (
            self.transform.origin_x + (col as f64 + 0.5) * cs,
            self.transform.origin_y + ((self.height - row) as f64 - 0.5) * cs,
        )
    }

    /// World extent as `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let t = &self.transform;
        (
            t.origin_x,
            t.origin_y,
            t.origin_x + self.width as f64 * t.cell_size,
            t.origin_y + self.height as f64 * t.cell_size,
        )
    }

    /// Cell containing a world point, using half-open cells.
    pub fn locate(&self, x: f64, y: f64) -> Option<CellIndex> {
        let t = &self.transform;
        let fc = ((x - t.origin_x) / t.cell_size).floor();
        let fr = ((y - t.origin_y) / t.cell_size).floor();
        if fc < 0.0 || fr < 0.0 || fc >= self.width as f64 || fr >= self.height as f64 {
            return None;
        }
        Some(CellIndex::new(self.height - 1 - fr as usize, fc as usize))
    }

    pub fn same_shape(&self, other: &GridFrame) -> bool {
        self.width == other.width && self.height == other.height && self.transform == other.transform
    }
}

/// A row-major raster of `f64` values with an exact-match nodata sentinel.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    pub transform: GeoTransform,
    pub values: Vec<f64>,
    pub nodata: f64,
}

impl Grid {
    /// New grid with every cell set to `nodata`.
    pub fn new(width: usize, height: usize, transform: GeoTransform, nodata: f64) -> Result<Self> {
        Self::filled(width, height, transform, nodata, nodata)
    }

    pub fn filled(
        width: usize,
        height: usize,
        transform: GeoTransform,
        nodata: f64,
        value: f64,
    ) -> Result<Self> {
        Self::from_values(width, height, transform, nodata, vec![value; width * height])
    }

    pub fn from_values(
        width: usize,
        height: usize,
        transform: GeoTransform,
        nodata: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!("grid dimensions must be ≥ 1, got {width}×{height}")));
        }
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}×{height} grid",
                values.len()
            )));
        }
        transform.validate()?;
        Ok(Grid {
            width,
            height,
            transform,
            values,
            nodata,
        })
    }

    /// Grid with the same frame and nodata, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Grid {
        assert_eq!(values.len(), self.len());
        Grid {
            values,
            ..self.clone_frame()
        }
    }

    fn clone_frame(&self) -> Grid {
        Grid {
            width: self.width,
            height: self.height,
            transform: self.transform,
            values: Vec::new(),
            nodata: self.nodata,
        }
    }

    pub fn frame(&self) -> GridFrame {
        GridFrame {
            width: self.width,
            height: self.height,
            transform: self.transform,
        }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn cell_of(&self, idx: usize) -> CellIndex {
        CellIndex::new(idx / self.width, idx % self.width)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        let w = self.width;
        self.values[row * w + col] = v;
    }

    #[inline]
    pub fn is_nodata(&self, v: f64) -> bool {
        v == self.nodata || (self.nodata.is_nan() && v.is_nan())
    }

    #[inline]
    pub fn is_valid_at(&self, idx: usize) -> bool {
        !self.is_nodata(self.values[idx])
    }

    /// Value at `(row, col)` or `None` for nodata.
    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        let v = self.get(row, col);
        (!self.is_nodata(v)).then_some(v)
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|&&v| !self.is_nodata(v)).count()
    }

    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        self.frame().cell_center(row, col)
    }

    pub fn contains(&self, row: isize, col: isize) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    pub fn is_edge(&self, row: usize, col: usize) -> bool {
        row == 0 || col == 0 || row + 1 == self.height || col + 1 == self.width
    }

    /// Largest valid value, if any.
    pub fn max_valid(&self) -> Option<f64> {
        self.values
            .iter()
            .copied()
            .filter(|&v| !self.is_nodata(v))
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }

    pub fn check_same_frame(&self, other: &Grid, what: &str) -> Result<()> {
        if self.frame().same_shape(&other.frame()) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what}: {}×{} vs {}×{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }
}
