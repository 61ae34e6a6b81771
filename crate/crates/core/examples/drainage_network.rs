//! Fill, route, accumulate, label and vectorize a small Y-shaped valley with
//! a pit dug into its main channel.
//!
//! cargo run --release --example drainage_network

use glyphflood::hydrology::{
    compute_flow_accumulation, compute_flow_direction, fill_depressions, label_watersheds, vectorize_network,
};
use glyphflood::synthetic::y_valley;

fn main() -> glyphflood::Result<()> {
    let mut dem = y_valley(15);
    dem.set(10, 7, dem.get(10, 7) - 3.0);

    let filled = fill_depressions(&dem)?;
    println!("pit at (10, 7): {:.3} m raised to {:.5} m", dem.get(10, 7), filled.get(10, 7));

    let flowdir = compute_flow_direction(&filled)?;
    let accum = compute_flow_accumulation(&flowdir, &[])?;
    let labels = label_watersheds(&flowdir)?;
    let outlets = labels.values.iter().fold(0.0f64, |m, &v| m.max(v));
    println!("{} outlets; accumulation at the south edge of the main channel: {}", outlets, accum.get(14, 7));

    let network = vectorize_network(&accum, &flowdir, 12.0)?;
    println!("{} links, {} junctions", network.links.len(), network.junctions().count());
    for link in &network.links {
        let (head, tail) = (link.cells.first().unwrap(), link.cells.last().unwrap());
        println!(
            "  link {}: ({}, {}) -> ({}, {}), accumulation {} -> {}",
            link.id, head.row, head.col, tail.row, tail.col, link.head_accumulation, link.tail_accumulation
        );
    }
    Ok(())
}
