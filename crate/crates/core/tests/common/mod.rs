//! Brute-force reference implementations and fixtures shared by the
//! integration suites. Each oracle is deliberately naive and written without
//! reference to the library's internals.

#![allow(dead_code)]

use glyphflood::{GeoTransform, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const NODATA: f64 = -9999.0;

/// Neighbour offsets in the tie-break order east, south-east, south,
/// south-west, west, north-west, north, north-east (rows grow southward).
pub const ORDER: [(i64, i64); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];
pub const CODES: [f64; 8] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid(w: usize, h: usize, cs: f64, values: Vec<f64>) -> Grid {
    Grid::from_values(w, h, GeoTransform::new(0.0, 0.0, cs).unwrap(), NODATA, values).unwrap()
}

/// Random DEM up to `max`×`max`, small integer-ish elevations (many ties
/// and flats) and optional nodata holes. Always keeps at least one valid cell.
pub fn random_dem(rng: &mut ChaCha8Rng, max: usize, holes: bool) -> Grid {
    let w = rng.gen_range(1..=max);
    let h = rng.gen_range(1..=max);
    let hole_p = if holes { rng.gen_range(0.0..0.25) } else { 0.0 };
    let coarse = rng.gen_bool(0.5);
    let mut v: Vec<f64> = (0..w * h)
        .map(|_| {
            if rng.gen_bool(hole_p) {
                NODATA
            } else if coarse {
                rng.gen_range(0..6) as f64
            } else {
                rng.gen_range(0.0..10.0f64)
            }
        })
        .collect();
    if v.iter().all(|&x| x == NODATA) {
        v[0] = 1.0;
    }
    grid(w, h, 1.0, v)
}

pub fn valid(g: &Grid, r: i64, c: i64) -> bool {
    r >= 0 && c >= 0 && (r as usize) < g.height && (c as usize) < g.width && g.get(r as usize, c as usize) != NODATA
}

/// On the grid edge or next to a hole.
pub fn on_boundary(g: &Grid, r: usize, c: usize) -> bool {
    if r == 0 || c == 0 || r + 1 == g.height || c + 1 == g.width {
        return true;
    }
    ORDER.iter().any(|&(dr, dc)| !valid(g, r as i64 + dr, c as i64 + dc))
}

/// Spill elevation by fixed-point relaxation: the lowest achievable maximum
/// elevation along any 8-connected path of valid cells to a boundary cell.
pub fn spill_surface(dem: &Grid) -> Vec<f64> {
    let (w, h) = (dem.width, dem.height);
    let mut s = vec![f64::INFINITY; w * h];
    for r in 0..h {
        for c in 0..w {
            let z = dem.get(r, c);
            if z == NODATA {
                s[r * w + c] = NODATA;
            } else if on_boundary(dem, r, c) {
                s[r * w + c] = z;
            }
        }
    }
    loop {
        let mut changed = false;
        for r in 0..h {
            for c in 0..w {
                let z = dem.get(r, c);
                if z == NODATA || on_boundary(dem, r, c) {
                    continue;
                }
                let best = ORDER
                    .iter()
                    .map(|&(dr, dc)| s[(r as i64 + dr) as usize * w + (c as i64 + dc) as usize])
                    .fold(f64::INFINITY, f64::min);
                let v = z.max(best);
                if v < s[r * w + c] {
                    s[r * w + c] = v;
                    changed = true;
                }
            }
        }
        if !changed {
            return s;
        }
    }
}

/// D8 codes by exhaustive neighbour comparison: 0 for an outlet, `None`
/// for an undrained interior cell, NODATA for holes.
pub fn d8_codes(dem: &Grid) -> Option<Vec<f64>> {
    let (w, h) = (dem.width, dem.height);
    let cs = dem.transform.cell_size;
    let mut out = vec![NODATA; w * h];
    for r in 0..h {
        for c in 0..w {
            let z = dem.get(r, c);
            if z == NODATA {
                continue;
            }
            let mut best = 0.0;
            let mut code = 0.0;
            for (k, &(dr, dc)) in ORDER.iter().enumerate() {
                let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                if !valid(dem, rr, cc) {
                    continue;
                }
                let dist = if dr != 0 && dc != 0 { cs * std::f64::consts::SQRT_2 } else { cs };
                let slope = (z - dem.get(rr as usize, cc as usize)) / dist;
                if slope > best {
                    best = slope;
                    code = CODES[k];
                }
            }
            if code == 0.0 && !on_boundary(dem, r, c) {
                return None;
            }
            out[r * w + c] = code;
        }
    }
    Some(out)
}

/// Downstream cell index for a D8 code grid, `None` at outlets and holes.
pub fn step(codes: &[f64], w: usize, i: usize) -> Option<usize> {
    let k = CODES.iter().position(|&c| c == codes[i])?;
    let (dr, dc) = ORDER[k];
    Some(((i / w) as i64 + dr) as usize * w + ((i % w) as i64 + dc) as usize)
}

/// Walks every cell's flow path to its outlet, crediting each visited cell
/// with one unit plus any seed at the start cell. Integer-valued inputs keep
/// this exact.
pub fn path_accumulation(codes: &[f64], w: usize, seeds: &[(usize, f64)]) -> Vec<f64> {
    let n = codes.len();
    let mut acc: Vec<f64> = codes.iter().map(|&c| if c == NODATA { NODATA } else { 0.0 }).collect();
    let mut extra = vec![0.0; n];
    for &(i, s) in seeds {
        extra[i] += s;
    }
    for start in 0..n {
        if codes[start] == NODATA {
            continue;
        }
        let amount = 1.0 + extra[start];
        let mut cur = Some(start);
        let mut guard = 0;
        while let Some(i) = cur {
            acc[i] += amount;
            cur = step(codes, w, i);
            guard += 1;
            assert!(guard <= n, "cycle in oracle path");
        }
    }
    acc
}

/// Outlet reached from every cell, as a cell index.
pub fn terminal(codes: &[f64], w: usize, mut i: usize) -> usize {
    while let Some(j) = step(codes, w, i) {
        i = j;
    }
    i
}

/// Labels 1..k by outlet rank in row-major order.
pub fn path_labels(codes: &[f64], w: usize) -> Vec<f64> {
    let outlets: Vec<usize> = (0..codes.len()).filter(|&i| codes[i] == 0.0).collect();
    (0..codes.len())
        .map(|i| {
            if codes[i] == NODATA {
                NODATA
            } else {
                let t = terminal(codes, w, i);
                (outlets.iter().position(|&o| o == t).unwrap() + 1) as f64
            }
        })
        .collect()
}

/// Flooding accumulation by the direct double loop over targets and window
/// centres.
pub fn direct_flood(dem: &Grid, acc: &Grid, kernel: usize, rise: f64, sigma: f64) -> Vec<f64> {
    let (w, h) = (dem.width as i64, dem.height as i64);
    let half = (kernel / 2) as i64;
    let ok = |r: i64, c: i64| {
        let i = (r * w + c) as usize;
        dem.values[i] != NODATA && acc.values[i] != NODATA
    };
    let mut out = vec![NODATA; (w * h) as usize];
    for r in 0..h {
        for c in 0..w {
            if !ok(r, c) {
                continue;
            }
            let ep = dem.values[(r * w + c) as usize];
            let mut best = f64::NEG_INFINITY;
            for rr in (r - half).max(0)..=(r + half).min(h - 1) {
                for cc in (c - half).max(0)..=(c + half).min(w - 1) {
                    if !ok(rr, cc) {
                        continue;
                    }
                    let q = (rr * w + cc) as usize;
                    if ep < dem.values[q] + rise {
                        let d2 = ((rr - r).pow(2) + (cc - c).pow(2)) as f64;
                        let v = acc.values[q] * (-d2 / (2.0 * sigma * sigma)).exp();
                        best = best.max(v);
                    }
                }
            }
            out[(r * w + c) as usize] = best;
        }
    }
    out
}

/// Even-odd ray cast from the point toward +x.
pub fn point_in_polygon(p: (f64, f64), poly: &[(f64, f64)]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.1 > p.1) != (b.1 > p.1) {
            let t = (p.1 - a.1) / (b.1 - a.1);
            if p.0 < a.0 + t * (b.0 - a.0) {
                inside = !inside;
            }
        }
    }
    inside
}

/// Distance from `p` to the segment `a`–`b`, by cases.
pub fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = |u: (f64, f64), v: (f64, f64)| ((u.0 - v.0).powi(2) + (u.1 - v.1).powi(2)).sqrt();
    let ab = (b.0 - a.0, b.1 - a.1);
    let len = d(a, b);
    if len == 0.0 {
        return d(p, a);
    }
    let along = ((p.0 - a.0) * ab.0 + (p.1 - a.1) * ab.1) / len;
    if along <= 0.0 {
        d(p, a)
    } else if along >= len {
        d(p, b)
    } else {
        ((p.0 - a.0) * ab.1 - (p.1 - a.1) * ab.0).abs() / len
    }
}

pub mod checks;
pub mod pipeline;
