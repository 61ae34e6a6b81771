use std::collections::VecDeque;

use super::{neighbour, AccumGrid, Direction, FlowDirGrid, WatershedLabels};
use crate::error::{Error, Result};
use crate::raster::CellIndex;

/// Valid cells ordered so that every cell precedes the cell it drains into.
///
/// Kahn's algorithm seeded in row-major order. Fails with the cells of one
/// cycle if the direction graph is not acyclic.
pub fn topological_order(flowdir: &FlowDirGrid) -> Result<Vec<usize>> {
    let n = flowdir.directions.len();
    let mut indegree = vec![0u8; n];
    let mut valid = 0usize;
    for i in 0..n {
        if flowdir.directions[i] == Direction::Nodata {
            continue;
        }
        valid += 1;
        if let Some(j) = flowdir.downstream(i) {
            indegree[j] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n)
        .filter(|&i| flowdir.directions[i] != Direction::Nodata && indegree[i] == 0)
        .collect();
    let mut order = Vec::with_capacity(valid);
    while let Some(i) = queue.pop_front() {
        order.push(i);
        if let Some(j) = flowdir.downstream(i) {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                queue.push_back(j);
            }
        }
    }
    if order.len() < valid {
        return Err(Error::Cycle(find_cycle(flowdir, &indegree)));
    }
    Ok(order)
}

fn find_cycle(flowdir: &FlowDirGrid, indegree: &[u8]) -> Vec<CellIndex> {
    let w = flowdir.width();
    let start = (0..indegree.len())
        .find(|&i| indegree[i] > 0)
        .expect("a cycle leaves positive in-degree behind");
    // Walk until a repeat; everything from the first repeat onward is the cycle.
    let mut seen = vec![usize::MAX; indegree.len()];
    let mut path = Vec::new();
    let mut cur = start;
    while seen[cur] == usize::MAX {
        seen[cur] = path.len();
        path.push(cur);
        cur = flowdir
            .downstream(cur)
            .expect("cells left after Kahn's pass all have a successor");
    }
    path[seen[cur]..]
        .iter()
        .map(|&i| CellIndex::new(i / w, i % w))
        .collect()
}

/// Self-inclusive upstream cell count, plus any injected seed amounts.
///
/// Each cell sums its upstream neighbours in the fixed E..NE order, so the
/// floating-point result does not depend on the traversal schedule.
pub fn compute_flow_accumulation(
    flowdir: &FlowDirGrid,
    seeds: &[(CellIndex, f64)],
) -> Result<AccumGrid> {
    let (w, h) = (flowdir.width(), flowdir.height());
    let order = topological_order(flowdir)?;
    let mut seed = vec![0.0; w * h];
    for &(cell, amount) in seeds {
        if cell.row >= h || cell.col >= w {
            return Err(Error::Config(format!(
                "seed ({}, {}) is outside the {w}×{h} grid",
                cell.row, cell.col
            )));
        }
        let i = cell.row * w + cell.col;
        if flowdir.directions[i] == Direction::Nodata {
            return Err(Error::Config(format!(
                "seed ({}, {}) lies on a nodata cell",
                cell.row, cell.col
            )));
        }
        if !(amount >= 0.0 && amount.is_finite()) {
            return Err(Error::Config(format!("seed amount must be ≥ 0, got {amount}")));
        }
        seed[i] += amount;
    }

    let nodata = flowdir.nodata();
    let mut acc = vec![nodata; w * h];
    for &i in &order {
        let mut total = 1.0;
        for (k, dir) in Direction::NEIGHBOURS.iter().enumerate() {
            let Some(j) = neighbour(w, h, i, k) else { continue };
            // The neighbour in direction `dir` drains here if it points back.
            if flowdir.directions[j] == opposite(*dir) {
                total += acc[j];
            }
        }
        acc[i] = total + seed[i];
    }
    Ok(flowdir.steepness.with_values(acc))
}

fn opposite(d: Direction) -> Direction {
    let k = d.slot().expect("neighbour direction");
    Direction::NEIGHBOURS[(k + 4) % 8]
}

/// Labels each valid cell with the outlet it drains to. Outlets are
/// numbered 1, 2, … in row-major order.
pub fn label_watersheds(flowdir: &FlowDirGrid) -> Result<WatershedLabels> {
    let order = topological_order(flowdir)?;
    let nodata = flowdir.nodata();
    let mut labels = vec![nodata; flowdir.directions.len()];
    let mut next = 1.0;
    for (i, d) in flowdir.directions.iter().enumerate() {
        if *d == Direction::Outlet {
            labels[i] = next;
            next += 1.0;
        }
    }
    for &i in order.iter().rev() {
        if let Some(j) = flowdir.downstream(i) {
            labels[i] = labels[j];
        }
    }
    Ok(flowdir.steepness.with_values(labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydrology::{compute_flow_direction, fill_depressions};
    use crate::raster::{GeoTransform, Grid};

    fn grid(values: Vec<f64>, w: usize) -> Grid {
        let h = values.len() / w;
        Grid::from_values(w, h, GeoTransform::new(0.0, 0.0, 1.0).unwrap(), -9999.0, values).unwrap()
    }

    fn east_row() -> FlowDirGrid {
        compute_flow_direction(&grid(vec![5.0, 4.0, 3.0, 2.0, 1.0], 5)).unwrap()
    }

    #[test]
    fn chain_accumulates() {
        let acc = compute_flow_accumulation(&east_row(), &[]).unwrap();
        assert_eq!(acc.values, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn seed_propagates_downstream() {
        let acc = compute_flow_accumulation(&east_row(), &[(CellIndex::new(0, 0), 100.0)]).unwrap();
        assert_eq!(acc.values, vec![101.0, 102.0, 103.0, 104.0, 105.0]);
    }

    #[test]
    fn bad_seeds_rejected() {
        let fd = east_row();
        assert!(compute_flow_accumulation(&fd, &[(CellIndex::new(1, 0), 1.0)]).is_err());
        assert!(compute_flow_accumulation(&fd, &[(CellIndex::new(0, 0), -1.0)]).is_err());
    }

    #[test]
    fn cycle_is_reported() {
        // E then W: two cells pointing at each other.
        let codes = grid(vec![1.0, 16.0, 0.0], 3);
        let fd = FlowDirGrid::from_code_grid(&codes).unwrap();
        match compute_flow_accumulation(&fd, &[]) {
            Err(Error::Cycle(cells)) => {
                assert_eq!(cells, vec![CellIndex::new(0, 0), CellIndex::new(0, 1)]);
            }
            other => panic!("expected cycle, got {other:?}"),
        }
        assert!(matches!(label_watersheds(&fd), Err(Error::Cycle(_))));
    }

    #[test]
    fn single_outlet_single_label() {
        let labels = label_watersheds(&east_row()).unwrap();
        assert!(labels.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn ridge_splits_two_basins() {
        // Ridge down the middle column; west half drains W, east half drains E.
        let values: Vec<f64> = (0..35)
            .map(|i| {
                let c = (i % 7) as f64;
                10.0 - (c - 3.0).abs() + (i / 7) as f64 * 0.01
            })
            .collect();
        let filled = fill_depressions(&grid(values, 7)).unwrap();
        let fd = compute_flow_direction(&filled).unwrap();
        let labels = label_watersheds(&fd).unwrap();
        let mut distinct: Vec<f64> = labels.values.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        assert_eq!(distinct, vec![1.0, 2.0]);
        for r in 0..5 {
            for c in 0..3 {
                assert_ne!(labels.get(r, c), labels.get(r, 6 - c));
            }
        }
    }

    #[test]
    fn all_nodata_labels() {
        let g = grid(vec![-9999.0; 4], 2);
        let fd = FlowDirGrid::from_code_grid(&g).unwrap();
        let labels = label_watersheds(&fd).unwrap();
        assert!(labels.values.iter().all(|&v| v == -9999.0));
        let acc = compute_flow_accumulation(&fd, &[]).unwrap();
        assert!(acc.values.iter().all(|&v| v == -9999.0));
    }
}
