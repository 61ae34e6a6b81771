//! Small synthetic terrains with known behaviour, used by the examples and
//! the test suites.

use crate::raster::{GeoTransform, Grid, DEFAULT_NODATA};
use crate::risk::GeoglyphRegion;
use crate::unsteady::{CulvertEdit, Discharge, InflowBoundary, SimConfig};

fn grid_from(width: usize, height: usize, cell_size: f64, f: impl Fn(f64, f64) -> f64) -> Grid {
    let t = GeoTransform::new(0.0, 0.0, cell_size).expect("positive cell size");
    let mut g = Grid::filled(width, height, t, DEFAULT_NODATA, 0.0).expect("non-empty grid");
    for r in 0..height {
        for c in 0..width {
            let (x, y) = g.cell_center(r, c);
            g.set(r, c, f(x, y));
        }
    }
    g
}

/// Plane falling eastward at `slope`, origin at (0, 0).
pub fn inclined_plane(length: f64, width: f64, cell_size: f64, slope: f64) -> Grid {
    let w = (length / cell_size).round() as usize;
    let h = (width / cell_size).round() as usize;
    grid_from(w, h, cell_size, |x, _| slope * (length - x))
}

/// Uniform-flow check: 1000 m × 50 m at 1 m, slope 0.001, n = 0.03, with
/// 0.1 m²/s entering along the whole west edge.
pub struct ManningPlane {
    pub dem: Grid,
    pub inflow: InflowBoundary,
    pub config: SimConfig,
    pub slope: f64,
    pub unit_discharge: f64,
}

pub fn manning_plane() -> ManningPlane {
    let (length, width, slope, q) = (1000.0, 50.0, 0.001, 0.1);
    let mut config = SimConfig::new(3000.0, 1000.0);
    config.manning_n = 0.03;
    ManningPlane {
        dem: inclined_plane(length, width, 1.0, slope),
        inflow: InflowBoundary {
            segment: [(0.5, 0.0), (0.5, width)],
            discharge: Discharge::Constant(q * width),
        },
        config,
        slope,
        unit_discharge: q,
    }
}

/// Square basin with a gently dished floor and a `wall`-metre rim one cell
/// thick, so nothing ever reaches the grid edge.
pub fn closed_basin(size: usize, cell_size: f64, wall: f64) -> Grid {
    let mid = size as f64 * cell_size / 2.0;
    let mut g = grid_from(size, size, cell_size, |x, y| {
        0.001 * ((x - mid).powi(2) + (y - mid).powi(2)).sqrt()
    });
    for r in 0..size {
        for c in 0..size {
            if g.is_edge(r, c) {
                g.set(r, c, wall);
            }
        }
    }
    g
}

/// A road embankment across a valley. Water from the west ponds against the
/// embankment and escapes round its southern end, across the "geoglyph"
/// polygon. The culvert runs under the embankment along the valley floor.
pub struct EmbankmentScene {
    pub dem: Grid,
    pub inflow: InflowBoundary,
    pub config: SimConfig,
    pub culvert: CulvertEdit,
    pub geoglyph: GeoglyphRegion,
}

pub const EMBANKMENT_WIDTH: usize = 120;
pub const EMBANKMENT_HEIGHT: usize = 80;

pub fn embankment_scene() -> EmbankmentScene {
    let (w, h) = (EMBANKMENT_WIDTH, EMBANKMENT_HEIGHT);
    let valley_y = 40.0;
    let dem = grid_from(w, h, 1.0, |x, y| {
        let ground = 0.01 * (w as f64 - x) + 0.02 * (y - valley_y).abs();
        // Embankment 3 m high from x = 58 to 62, open south of y = 10.
        if (58.0..62.0).contains(&x) && y >= 10.0 {
            ground + 3.0
        } else {
            ground
        }
    });
    let mut config = SimConfig::new(900.0, 300.0);
    config.manning_n = 0.035;
    EmbankmentScene {
        dem,
        inflow: InflowBoundary {
            segment: [(0.5, valley_y - 5.0), (0.5, valley_y + 5.0)],
            discharge: Discharge::Constant(2.0),
        },
        config,
        culvert: CulvertEdit {
            path: vec![(52.0, valley_y), (68.0, valley_y)],
            width: 4.0,
            invert_drop: 0.3,
        },
        geoglyph: GeoglyphRegion::new(
            "g1",
            "downstream figure",
            vec![(66.0, 1.0), (90.0, 1.0), (90.0, 12.0), (66.0, 12.0)],
        )
        .expect("valid polygon"),
    }
}

/// Two tributaries meeting in a Y and draining south off the grid.
///
/// An `n × n` grid (n ≥ 7) at 1 m: a main channel down the centre column from
/// the middle row to the south edge, and two arms running diagonally from the
/// north corners to the confluence. The south row is a flat, lowest strip so
/// each of its cells is an outlet rather than a channel along the edge.
pub fn y_valley(n: usize) -> Grid {
    assert!(n >= 7, "y_valley needs n ≥ 7");
    let mid = (n / 2) as f64;
    let size = n as f64;
    let mut g = grid_from(n, n, 1.0, |_, _| 0.0);
    for r in 0..n {
        for c in 0..n {
            let (rf, cf) = (r as f64, c as f64);
            // Distance from the Y centreline, in cells.
            let off = if rf >= mid {
                (cf - mid).abs()
            } else {
                let arm = mid - rf;
                (cf - (mid - arm)).abs().min((cf - (mid + arm)).abs())
            };
            let z = if r + 1 == n { 10.0 } else { 10.0 + (size - rf) * 0.5 + off * 1.0 };
            g.set(r, c, z);
        }
    }
    g
}
