//! Uniform flow down a 1000 m inclined plane compared with Manning's
//! normal depth.
//!
//! cargo run --release --example manning_plane

use std::time::Instant;

use glyphflood::synthetic::manning_plane;
use glyphflood::unsteady::{simulate, velocity_field};

fn main() -> glyphflood::Result<()> {
    let case = manning_plane();
    let n = case.config.manning_n;
    let normal = (n * case.unit_discharge / case.slope.sqrt()).powf(0.6);
    let start = Instant::now();
    let out = simulate(&case.dem, &case.inflow, &case.config)?;
    let elapsed = start.elapsed();

    let mid = case.dem.width / 2;
    let row = case.dem.height / 2;
    for (s, b) in out.snapshots.iter().zip(&out.balances) {
        let speed = velocity_field(s, case.config.dry_depth);
        println!(
            "t = {:>5} s  depth(500 m) = {:.4} m  speed = {:.4} m/s  mass residual = {:.2e}",
            s.t,
            s.depth.get(row, mid),
            speed.get(row, mid),
            b.relative_error()
        );
    }
    let last = out.snapshots.last().unwrap();
    let h = last.depth.get(row, mid);
    println!("analytic normal depth {normal:.4} m, simulated {h:.4} m, error {:.2}%", 100.0 * (h - normal).abs() / normal);
    println!("wall time {:.2?}", elapsed);
    Ok(())
}
