//! Carry contributing area from a coarse 5 m regional grid into a 0.4 m
//! survey grid as inlet seeds, then accumulate on the fine grid.
//!
//! cargo run --release --example coarse_inflow

use glyphflood::hydrology::{compute_flow_accumulation, compute_flow_direction, fill_depressions, vectorize_network};
use glyphflood::mosaic::{as_accumulation_seeds, derive_inlet_seeds, format_seeds};
use glyphflood::{GeoTransform, Grid};

fn main() -> glyphflood::Result<()> {
    // Regional grid: 40 × 20 cells of 5 m, a valley falling east along y = 50.
    let coarse_t = GeoTransform::new(0.0, 0.0, 5.0)?;
    let mut coarse = Grid::filled(40, 20, coarse_t, -9999.0, 0.0)?;
    for r in 0..20 {
        for c in 0..40 {
            let (x, y) = coarse.cell_center(r, c);
            coarse.set(r, c, 100.0 - 0.05 * x + 0.2 * (y - 52.5).abs());
        }
    }
    let fd = compute_flow_direction(&fill_depressions(&coarse)?)?;
    let acc = compute_flow_accumulation(&fd, &[])?;
    let network = vectorize_network(&acc, &fd, 20.0)?;

    // Survey grid: 25 m × 25 m at 0.4 m straddling the valley downstream.
    let fine_t = GeoTransform::new(120.0, 40.0, 0.4)?;
    let mut fine = Grid::filled(62, 62, fine_t, -9999.0, 0.0)?;
    for r in 0..fine.height {
        for c in 0..fine.width {
            let (x, y) = fine.cell_center(r, c);
            fine.set(r, c, 100.0 - 0.05 * x + 0.2 * (y - 52.5).abs());
        }
    }
    let seeds = derive_inlet_seeds(&network, &network.frame, &fine, 20.0)?;
    print!("seeds (row col accumulation):\n{}", format_seeds(&seeds));

    let fine_fd = compute_flow_direction(&fill_depressions(&fine)?)?;
    let local = compute_flow_accumulation(&fine_fd, &[])?;
    let seeded = compute_flow_accumulation(&fine_fd, &as_accumulation_seeds(&seeds))?;
    let peak = |g: &Grid| g.values.iter().fold(0.0f64, |m, &v| m.max(v));
    println!("peak fine accumulation: local only {}, with upstream seeds {}", peak(&local), peak(&seeded));
    Ok(())
}
