use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{GeoTransform, Grid};
use crate::error::{Error, Result};

const HEADER_KEYS: [&str; 6] = [
    "ncols",
    "nrows",
    "xllcorner",
    "yllcorner",
    "cellsize",
    "NODATA_value",
];

pub fn read_ascii_grid(path: impl AsRef<Path>) -> Result<Grid> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ascii_grid(&text)
}

/// Parses the six-line header followed by `nrows × ncols` values.
pub fn parse_ascii_grid(text: &str) -> Result<Grid> {
    let mut lines = text.lines();
    let mut header = [0.0f64; 6];
    for (i, key) in HEADER_KEYS.iter().enumerate() {
        let line = lines
            .next()
            .ok_or_else(|| Error::Header(format!("missing `{key}` line")))?;
        let mut parts = line.split_whitespace();
        let found = parts.next().unwrap_or("");
        if !found.eq_ignore_ascii_case(key) {
            return Err(Error::Header(format!("expected `{key}`, found `{found}`")));
        }
        let raw = parts
            .next()
            .ok_or_else(|| Error::Header(format!("`{key}` has no value")))?;
        if parts.next().is_some() {
            return Err(Error::Header(format!("`{key}` has trailing tokens")));
        }
        header[i] = raw
            .parse()
            .map_err(|_| Error::Header(format!("`{key}` value {raw:?} is not a number")))?;
    }
    let dim = |v: f64, key: &str| -> Result<usize> {
        if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
            Ok(v as usize)
        } else {
            Err(Error::Header(format!("`{key}` must be a positive integer, got {v}")))
        }
    };
    let width = dim(header[0], "ncols")?;
    let height = dim(header[1], "nrows")?;
    let transform = GeoTransform::new(header[2], header[3], header[4])
        .map_err(|e| Error::Header(e.to_string()))?;
    let nodata = header[5];

    let expected = width * height;
    let mut values = Vec::with_capacity(expected);
    let mut found = 0usize;
    for line in lines {
        for token in line.split_whitespace() {
            if found < expected {
                let v: f64 = token.parse().map_err(|_| Error::Token {
                    token: token.to_string(),
                    position: found,
                })?;
                values.push(v);
            }
            found += 1;
        }
    }
    if found != expected {
        return Err(Error::TokenCount { expected, found });
    }
    Grid::from_values(width, height, transform, nodata, values)
}

/// Serializes with the shortest decimal form that parses back to the same bits.
pub fn format_ascii_grid(grid: &Grid) -> String {
    let mut out = String::with_capacity(grid.len() * 8 + 128);
    let t = &grid.transform;
    let _ = writeln!(out, "ncols {}", grid.width);
    let _ = writeln!(out, "nrows {}", grid.height);
    let _ = writeln!(out, "xllcorner {}", t.origin_x);
    let _ = writeln!(out, "yllcorner {}", t.origin_y);
    let _ = writeln!(out, "cellsize {}", t.cell_size);
    let _ = writeln!(out, "NODATA_value {}", grid.nodata);
    for row in grid.values.chunks(grid.width) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_ascii_grid(grid: &Grid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_ascii_grid(grid)).map_err(|e| Error::io(path, e))
}
