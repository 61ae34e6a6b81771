//! Rank three figure outlines by the flooding accumulation reaching them.
//!
//! cargo run --release --example geoglyph_risk

use glyphflood::flood::{flooding_flow_accumulation, FloodSpreadConfig};
use glyphflood::hydrology::{compute_flow_accumulation, compute_flow_direction, fill_depressions};
use glyphflood::risk::{format_report_csv, score_geoglyphs, GeoglyphRegion, DEFAULT_DANGER_THRESHOLD};
use glyphflood::{GeoTransform, Grid};

fn main() -> glyphflood::Result<()> {
    let t = GeoTransform::new(0.0, 0.0, 0.4)?;
    let mut dem = Grid::filled(150, 100, t, -9999.0, 0.0)?;
    for r in 0..dem.height {
        for c in 0..dem.width {
            let (x, y) = dem.cell_center(r, c);
            dem.set(r, c, 0.01 * (60.0 - x) + 0.002 * (y - 20.0).powi(2) / 4.0);
        }
    }
    let filled = fill_depressions(&dem)?;
    let accum = compute_flow_accumulation(&compute_flow_direction(&filled)?, &[])?;
    let ffa = flooding_flow_accumulation(&filled, &accum, &FloodSpreadConfig::default())?;

    let regions = vec![
        // Astride the wash axis near its mouth.
        GeoglyphRegion::new("lizard", "Lizard", vec![(48.0, 17.0), (56.0, 17.0), (56.0, 23.0), (48.0, 23.0)])?,
        // Upslope on the north flank.
        GeoglyphRegion::new("tree", "Tree", vec![(20.0, 33.0), (28.0, 33.0), (24.0, 39.0)])?,
        // Mid-wash, just off the axis.
        GeoglyphRegion::new("hand", "Hand", vec![(30.0, 12.0), (36.0, 12.0), (36.0, 18.0), (30.0, 18.0)])?,
    ];
    let reports = score_geoglyphs(&ffa, &regions, DEFAULT_DANGER_THRESHOLD)?;
    print!("{}", format_report_csv(&reports));
    Ok(())
}
