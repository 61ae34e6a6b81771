use std::fs;
use std::path::Path;

use super::Grid;
use crate::error::{Error, Result};

const RED_FLOOR: f64 = 80.0;

/// Colour of one value on the safe/unsafe ramp.
///
/// Below `threshold`: red from (80,0,0) at 0 toward (255,0,0).
/// At or above: (0,0,255) at the threshold brightening to white at `max`.
pub fn falsecolor_pixel(value: f64, threshold: f64, max: f64) -> [u8; 3] {
    if value < threshold {
        let t = (value / threshold).clamp(0.0, 1.0);
        [(RED_FLOOR + (255.0 - RED_FLOOR) * t).round() as u8, 0, 0]
    } else {
        let t = if max > threshold {
            ((value - threshold) / (max - threshold)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let c = (255.0 * t).round() as u8;
        [c, c, 255]
    }
}

/// Binary `P6` pixmap bytes for `grid`; nodata cells are black.
pub fn falsecolor_ppm(grid: &Grid, threshold: f64) -> Result<Vec<u8>> {
    if !(threshold > 0.0) {
        return Err(Error::Config(format!("threshold must be positive, got {threshold}")));
    }
    let max = grid.max_valid().unwrap_or(threshold);
    let header = format!("P6\n{} {}\n255\n", grid.width, grid.height);
    let mut out = Vec::with_capacity(header.len() + grid.len() * 3);
    out.extend_from_slice(header.as_bytes());
    for &v in &grid.values {
        if grid.is_nodata(v) {
            out.extend_from_slice(&[0, 0, 0]);
        } else {
            out.extend_from_slice(&falsecolor_pixel(v, threshold, max));
        }
    }
    Ok(out)
}

pub fn render_falsecolor(grid: &Grid, threshold: f64, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = falsecolor_ppm(grid, threshold)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
