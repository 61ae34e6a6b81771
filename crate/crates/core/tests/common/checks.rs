//! Randomised oracle sweeps shared by the integration tests and the
//! acceptance gate.

use std::time::{Duration, Instant};

use glyphflood::flood::{flooding_flow_accumulation, FloodSpreadConfig};
use glyphflood::hydrology::{
    compute_flow_accumulation, compute_flow_direction, fill_depressions, fill_depressions_with, label_watersheds,
    DEFAULT_FILL_EPSILON,
};
use glyphflood::{CellIndex, Error, Grid};
use rand::Rng;

use super::*;

#[derive(Debug, Default)]
pub struct HydroReport {
    pub instances: usize,
    pub oracle_failures: Vec<String>,
    pub sink_failures: Vec<String>,
    pub conservation_failures: Vec<String>,
    pub elapsed: Duration,
}

fn eq_grid(name: &str, case: usize, got: &[f64], want: &[f64]) -> Option<String> {
    let bad = got.iter().zip(want).position(|(a, b)| a.to_bits() != b.to_bits());
    bad.map(|i| format!("case {case}: {name} differs at index {i}: {} vs oracle {}", got[i], want[i]))
}

/// Runs `count` random DEMs (up to 16×16, with holes) through fill, flow
/// direction, accumulation and labelling, comparing each against the naive
/// oracles and checking the no-sink and conservation properties.
pub fn hydrology_sweep(count: usize, seed: u64) -> HydroReport {
    let start = Instant::now();
    let mut rng = rng(seed);
    let mut rep = HydroReport::default();
    for case in 0..count {
        rep.instances += 1;
        let dem = random_dem(&mut rng, 16, true);
        let (w, n) = (dem.width, dem.len());

        // Flow direction straight on the raw surface: undrained exactly when
        // the oracle finds an interior cell with no lower neighbour.
        match (compute_flow_direction(&dem), d8_codes(&dem)) {
            (Ok(fd), Some(want)) => {
                if let Some(m) = eq_grid("raw flowdir", case, &fd.to_code_grid().values, &want) {
                    rep.oracle_failures.push(m);
                }
            }
            (Err(Error::Undrained(_)), None) => {}
            (got, want) => rep
                .oracle_failures
                .push(format!("case {case}: raw flowdir {:?} vs oracle drained={}", got.map(|_| ()), want.is_some())),
        }

        let spill = spill_surface(&dem);
        let exact = fill_depressions_with(&dem, 0.0).unwrap();
        if let Some(m) = eq_grid("spill fill", case, &exact.values, &spill) {
            rep.oracle_failures.push(m);
        }

        let filled = fill_depressions(&dem).unwrap();
        let slack = n as f64 * DEFAULT_FILL_EPSILON * 1.000001;
        for (i, &spill_i) in spill.iter().enumerate() {
            if spill_i == NODATA {
                if filled.values[i] != NODATA {
                    rep.oracle_failures.push(format!("case {case}: hole {i} filled"));
                }
                continue;
            }
            let f = filled.values[i];
            if !(f >= spill_i && f <= spill_i + slack) {
                rep.oracle_failures.push(format!("case {case}: filled {f} outside [{}, +{slack}]", spill_i));
            }
        }
        for r in 0..dem.height {
            for c in 0..w {
                if filled.get(r, c) == NODATA || on_boundary(&filled, r, c) {
                    continue;
                }
                let z = filled.get(r, c);
                let lower = ORDER.iter().any(|&(dr, dc)| {
                    let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                    valid(&filled, rr, cc) && filled.get(rr as usize, cc as usize) < z
                });
                if !lower {
                    rep.sink_failures.push(format!("case {case}: sink at ({r}, {c})"));
                }
            }
        }

        let Some(codes) = d8_codes(&filled) else {
            rep.oracle_failures.push(format!("case {case}: oracle finds an undrained cell after fill"));
            continue;
        };
        let fd = match compute_flow_direction(&filled) {
            Ok(fd) => fd,
            Err(e) => {
                rep.oracle_failures.push(format!("case {case}: flowdir after fill: {e}"));
                continue;
            }
        };
        if let Some(m) = eq_grid("flowdir", case, &fd.to_code_grid().values, &codes) {
            rep.oracle_failures.push(m);
        }

        // Integer seeds on a few valid cells keep the arithmetic exact.
        let valid_cells: Vec<usize> = (0..n).filter(|&i| codes[i] != NODATA).collect();
        let seeds: Vec<(usize, f64)> = (0..rng.gen_range(0..3))
            .map(|_| (valid_cells[rng.gen_range(0..valid_cells.len())], rng.gen_range(0..50) as f64))
            .collect();
        let seed_cells: Vec<(CellIndex, f64)> = seeds.iter().map(|&(i, s)| (CellIndex::new(i / w, i % w), s)).collect();
        let acc = compute_flow_accumulation(&fd, &seed_cells).unwrap();
        let want_acc = path_accumulation(&codes, w, &seeds);
        if let Some(m) = eq_grid("accumulation", case, &acc.values, &want_acc) {
            rep.oracle_failures.push(m);
        }
        let labels = label_watersheds(&fd).unwrap();
        let want_labels = path_labels(&codes, w);
        if let Some(m) = eq_grid("labels", case, &labels.values, &want_labels) {
            rep.oracle_failures.push(m);
        }

        // Each outlet carries exactly its watershed's cells plus seeds.
        for o in (0..n).filter(|&i| codes[i] == 0.0) {
            let label = labels.values[o];
            let members = (0..n).filter(|&i| labels.values[i] == label).count() as f64;
            let seeded: f64 = seeds.iter().filter(|&&(i, _)| labels.values[i] == label).map(|&(_, s)| s).sum();
            if acc.values[o] != members + seeded {
                rep.conservation_failures.push(format!(
                    "case {case}: outlet {o} has {} but watershed holds {members} cells + {seeded} seeded",
                    acc.values[o]
                ));
            }
        }
    }
    rep.elapsed = start.elapsed();
    rep
}

#[derive(Debug, Default)]
pub struct FloodReport {
    pub instances: usize,
    pub mismatches: Vec<String>,
    pub dominance_failures: Vec<String>,
    pub monotonicity_failures: Vec<String>,
}

/// Random accumulation over a random surface, including holes in either
/// layer.
pub fn random_flood_inputs(rng: &mut rand_chacha::ChaCha8Rng, w: usize, h: usize) -> (Grid, Grid) {
    let hole_p = rng.gen_range(0.0..0.1);
    let relief = rng.gen_range(0.05..2.0);
    let dem: Vec<f64> = (0..w * h)
        .map(|_| if rng.gen_bool(hole_p) { NODATA } else { rng.gen_range(0.0..relief) })
        .collect();
    let acc: Vec<f64> = (0..w * h)
        .map(|_| {
            if rng.gen_bool(hole_p / 2.0) {
                NODATA
            } else if rng.gen_bool(0.05) {
                rng.gen_range(100.0..10_000.0f64).round()
            } else {
                rng.gen_range(1..20) as f64
            }
        })
        .collect();
    (grid(w, h, 0.4, dem), grid(w, h, 0.4, acc))
}

/// `count` random 32×32 instances with the given kernel against the direct
/// double loop, plus dominance and monotonicity in the rise.
pub fn flood_sweep(count: usize, seed: u64, kernel: usize) -> FloodReport {
    let mut rng = rng(seed);
    let mut rep = FloodReport::default();
    for case in 0..count {
        rep.instances += 1;
        let (dem, acc) = random_flood_inputs(&mut rng, 32, 32);
        let rise = rng.gen_range(0.01..0.5);
        let cfg = FloodSpreadConfig::with_kernel(kernel, rise);
        let got = flooding_flow_accumulation(&dem, &acc, &cfg).unwrap();
        let want = direct_flood(&dem, &acc, kernel, rise, cfg.sigma);
        if let Some(i) = got.values.iter().zip(&want).position(|(a, b)| a.to_bits() != b.to_bits()) {
            rep.mismatches.push(format!("case {case}: index {i}: {} vs oracle {}", got.values[i], want[i]));
        }
        for i in 0..got.len() {
            let (o, a) = (got.values[i], acc.values[i]);
            if o != NODATA && a != NODATA && o < a {
                rep.dominance_failures.push(format!("case {case}: index {i}: {o} < {a}"));
                break;
            }
        }
        let higher = FloodSpreadConfig::with_kernel(kernel, rise * 2.0);
        let more = flooding_flow_accumulation(&dem, &acc, &higher).unwrap();
        if let Some(i) = (0..got.len()).find(|&i| got.values[i] != NODATA && more.values[i] < got.values[i]) {
            rep.monotonicity_failures.push(format!(
                "case {case}: index {i}: rise {rise} gives {} but {} gives {}",
                got.values[i],
                rise * 2.0,
                more.values[i]
            ));
        }
    }
    rep
}
