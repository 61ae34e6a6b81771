//! Per-figure danger scores from the flooding-flow-accumulation layer.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::raster::{CellIndex, Grid};

/// Cell-count danger threshold; a figure is unsafe when any of its cells
/// reaches it.
pub const DEFAULT_DANGER_THRESHOLD: f64 = 3257.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GeoglyphRegion {
    pub id: String,
    pub name: String,
    /// Exterior ring in world metres; closing vertex optional.
    pub polygon: Vec<(f64, f64)>,
}

impl GeoglyphRegion {
    pub fn new(id: impl Into<String>, name: impl Into<String>, polygon: Vec<(f64, f64)>) -> Result<Self> {
        let r = GeoglyphRegion {
            id: id.into(),
            name: name.into(),
            polygon,
        };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        let ring = self.open_ring();
        if ring.len() < 3 {
            return Err(Error::Region(format!("{}: fewer than 3 vertices", self.id)));
        }
        if ring.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Region(format!("{}: non-finite vertex", self.id)));
        }
        Ok(())
    }

    /// Vertices without a repeated closing vertex.
    pub fn open_ring(&self) -> &[(f64, f64)] {
        match self.polygon.as_slice() {
            [first, .., last] if first == last => &self.polygon[..self.polygon.len() - 1],
            p => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub id: String,
    pub name: String,
    pub max_ffa: f64,
    pub log10_max_ffa: f64,
    pub unsafe_: bool,
    pub cells_evaluated: usize,
}

/// How the danger threshold was chosen, kept for provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DangerThreshold {
    /// A direct cell count.
    Cells(f64),
    /// A contributing area in m², converted with the grid's cell size.
    Area(f64),
}

impl Default for DangerThreshold {
    fn default() -> Self {
        DangerThreshold::Cells(DEFAULT_DANGER_THRESHOLD)
    }
}

impl DangerThreshold {
    pub fn cells(&self, cell_size: f64) -> f64 {
        match *self {
            DangerThreshold::Cells(n) => n,
            DangerThreshold::Area(m2) => area_to_cells(m2, cell_size),
        }
    }

    pub fn describe(&self, cell_size: f64) -> String {
        match *self {
            DangerThreshold::Cells(n) => format!("cell count {n}"),
            DangerThreshold::Area(m2) => {
                format!("area {m2} m² at {cell_size} m cells = {} cells", area_to_cells(m2, cell_size))
            }
        }
    }
}

/// Number of `cell_size` cells covering `area_m2`.
///
/// The default 3257-cell threshold and a 100 m × 100 m area only agree for
/// cells of about 1.75 m; at 0.4 m the same area is 62 500 cells.
pub fn area_to_cells(area_m2: f64, cell_size: f64) -> f64 {
    area_m2 / (cell_size * cell_size)
}

/// Cells whose centres fall inside the polygon by the even-odd rule;
/// centres exactly on an edge or vertex count as inside.
pub fn rasterize_polygon(region: &GeoglyphRegion, template: &Grid) -> Result<Vec<CellIndex>> {
    region.validate()?;
    let ring = region.open_ring();
    let frame = template.frame();
    let cs = template.transform.cell_size;
    let (min_y, max_y) = ring
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| (lo.min(y), hi.max(y)));
    let (min_x, max_x) = ring
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));

    // Candidate rows/cols from the bounding box, padded by one cell.
    let t = &template.transform;
    let h = template.height as isize;
    let w = template.width as isize;
    let row_of = |y: f64| h - 1 - ((y - t.origin_y) / cs).floor() as isize;
    let col_of = |x: f64| ((x - t.origin_x) / cs).floor() as isize;
    let r0 = (row_of(max_y) - 1).max(0);
    let r1 = (row_of(min_y) + 1).min(h - 1);
    let c0 = (col_of(min_x) - 1).max(0);
    let c1 = (col_of(max_x) + 1).min(w - 1);

    let mut cells = Vec::new();
    if r0 <= r1 && c0 <= c1 {
        for r in r0..=r1 {
            let (_, y) = frame.cell_center(r as usize, 0);
            if y < min_y || y > max_y {
                continue;
            }
            let mut crossings = scanline_crossings(ring, y);
            crossings.sort_by(f64::total_cmp);
            for c in c0..=c1 {
                let (x, _) = frame.cell_center(r as usize, c as usize);
                let right = crossings.iter().filter(|&&xi| x < xi).count();
                if right % 2 == 1 || on_boundary(ring, x, y) {
                    cells.push(CellIndex::new(r as usize, c as usize));
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::NoOverlappingCells(region.id.clone()));
    }
    Ok(cells)
}

/// x of each edge crossing the horizontal line through `y`, using the
/// half-open rule `(yi > y) != (yj > y)`.
fn scanline_crossings(ring: &[(f64, f64)], y: f64) -> Vec<f64> {
    let n = ring.len();
    (0..n)
        .filter_map(|i| {
            let (xi, yi) = ring[i];
            let (xj, yj) = ring[(i + 1) % n];
            ((yi > y) != (yj > y)).then(|| (xj - xi) * (y - yi) / (yj - yi) + xi)
        })
        .collect()
}

fn on_boundary(ring: &[(f64, f64)], x: f64, y: f64) -> bool {
    let n = ring.len();
    (0..n).any(|i| {
        let (ax, ay) = ring[i];
        let (bx, by) = ring[(i + 1) % n];
        let cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax);
        cross == 0.0
            && x >= ax.min(bx)
            && x <= ax.max(bx)
            && y >= ay.min(by)
            && y <= ay.max(by)
    })
}

/// One report per region, sorted by `max_ffa` descending (stable for ties).
pub fn score_geoglyphs(ffa: &Grid, regions: &[GeoglyphRegion], threshold: f64) -> Result<Vec<RiskReport>> {
    if !(threshold > 0.0) {
        return Err(Error::Config(format!("threshold must be positive, got {threshold}")));
    }
    let mut reports = regions
        .par_iter()
        .map(|region| {
            let cells = rasterize_polygon(region, ffa)?;
            let mut max: Option<f64> = None;
            let mut count = 0usize;
            for c in &cells {
                if let Some(v) = ffa.value(c.row, c.col) {
                    count += 1;
                    max = Some(max.map_or(v, |m| m.max(v)));
                }
            }
            let max_ffa = max.ok_or_else(|| Error::ZeroValidCells(region.id.clone()))?;
            Ok(RiskReport {
                id: region.id.clone(),
                name: region.name.clone(),
                max_ffa,
                log10_max_ffa: max_ffa.log10(),
                unsafe_: max_ffa >= threshold,
                cells_evaluated: count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| b.max_ffa.total_cmp(&a.max_ffa));
    Ok(reports)
}

/// Reads a GeoJSON FeatureCollection of Polygon features carrying `id` and
/// `name` properties. Polygons with interior rings are rejected.
pub fn parse_regions_geojson(text: &str) -> Result<Vec<GeoglyphRegion>> {
    let doc: Value = serde_json::from_str(text)?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::Region("expected a GeoJSON FeatureCollection".into()));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Region("FeatureCollection without `features`".into()))?;
    features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let props = f.get("properties").cloned().unwrap_or(Value::Null);
            let id = match props.get("id").or_else(|| f.get("id")) {
                Some(Value::String(s)) => s.clone(),
                Some(Value::Number(n)) => n.to_string(),
                _ => return Err(Error::Region(format!("feature {i}: missing `id`"))),
            };
            let name = props
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Region(format!("feature {id}: missing `name`")))?
                .to_string();
            let geom = f
                .get("geometry")
                .ok_or_else(|| Error::Region(format!("feature {id}: missing geometry")))?;
            if geom.get("type").and_then(Value::as_str) != Some("Polygon") {
                return Err(Error::Region(format!("feature {id}: geometry is not a Polygon")));
            }
            let rings = geom
                .get("coordinates")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Region(format!("feature {id}: missing coordinates")))?;
            if rings.len() != 1 {
                return Err(Error::Region(format!(
                    "feature {id}: polygons with holes are not supported"
                )));
            }
            let ring = rings[0]
                .as_array()
                .ok_or_else(|| Error::Region(format!("feature {id}: bad ring")))?
                .iter()
                .map(|p| match p.as_array().map(Vec::as_slice) {
                    Some([x, y, ..]) => match (x.as_f64(), y.as_f64()) {
                        (Some(x), Some(y)) => Ok((x, y)),
                        _ => Err(Error::Region(format!("feature {id}: non-numeric vertex"))),
                    },
                    _ => Err(Error::Region(format!("feature {id}: bad vertex"))),
                })
                .collect::<Result<Vec<_>>>()?;
            GeoglyphRegion::new(id, name, ring)
        })
        .collect()
}

pub fn read_regions_geojson(path: impl AsRef<Path>) -> Result<Vec<GeoglyphRegion>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_regions_geojson(&text)
}

pub const REPORT_HEADER: &str = "id,name,max_ffa,log10_max_ffa,unsafe,cells_evaluated";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn format_report_csv(reports: &[RiskReport]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&r.id),
            csv_field(&r.name),
            r.max_ffa,
            r.log10_max_ffa,
            r.unsafe_,
            r.cells_evaluated
        );
    }
    out
}

/// `name<TAB>log10_max_ffa` rows for a log-scale bar chart.
pub fn format_report_tsv(reports: &[RiskReport]) -> String {
    let mut out = String::from("name\tlog10_max_ffa\n");
    for r in reports {
        let _ = writeln!(out, "{}\t{}", r.name.replace(['\t', '\n'], " "), r.log10_max_ffa);
    }
    out
}

pub fn write_report_csv(reports: &[RiskReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_report_csv(reports)).map_err(|e| Error::io(path, e))
}

pub fn write_report_tsv(reports: &[RiskReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_report_tsv(reports)).map_err(|e| Error::io(path, e))
}
