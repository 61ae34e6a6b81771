use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{CellIndex, Grid};

/// A trench cut along a polyline, standing in for a culvert under an
/// embankment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CulvertEdit {
    /// World coordinates, metres.
    pub path: Vec<(f64, f64)>,
    /// Metres; at least one cell.
    pub width: f64,
    /// Metres below the lowest terrain under the trench.
    pub invert_drop: f64,
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

/// Valid cells whose centres lie within `width / 2` of the path, row-major.
pub fn culvert_cells(dem: &Grid, edit: &CulvertEdit) -> Result<Vec<CellIndex>> {
    if edit.path.is_empty() {
        return Err(Error::Config("culvert path has no vertices".into()));
    }
    if !(edit.width >= dem.transform.cell_size) {
        return Err(Error::Config(format!(
            "culvert width {} is below the cell size {}",
            edit.width, dem.transform.cell_size
        )));
    }
    let radius = edit.width / 2.0;
    let segments: Vec<((f64, f64), (f64, f64))> = if edit.path.len() == 1 {
        vec![(edit.path[0], edit.path[0])]
    } else {
        edit.path.windows(2).map(|p| (p[0], p[1])).collect()
    };
    let mut cells = Vec::new();
    for r in 0..dem.height {
        for c in 0..dem.width {
            if dem.value(r, c).is_none() {
                continue;
            }
            let p = dem.cell_center(r, c);
            if segments.iter().any(|&(a, b)| point_segment_distance(p, a, b) <= radius) {
                cells.push(CellIndex::new(r, c));
            }
        }
    }
    Ok(cells)
}

/// Lowers every cell within `width / 2` of the path to a flat bed at the
/// lowest elevation among those cells minus `invert_drop`.
pub fn carve_culvert(dem: &Grid, edit: &CulvertEdit) -> Result<Grid> {
    if !(edit.invert_drop > 0.0 && edit.invert_drop.is_finite()) {
        return Err(Error::Config(format!(
            "invert drop must be positive, got {}",
            edit.invert_drop
        )));
    }
    let cells = culvert_cells(dem, edit)?;
    if cells.is_empty() {
        return Err(Error::OutsideExtent);
    }
    let floor = cells
        .iter()
        .map(|c| dem.get(c.row, c.col))
        .fold(f64::INFINITY, f64::min);
    let bed = floor - edit.invert_drop;
    let mut out = dem.clone();
    for c in cells {
        out.set(c.row, c.col, bed);
    }
    Ok(out)
}
