//! Flooding flow accumulation: a screening proxy that spreads each cell's
//! accumulation over a square window under a water-rise elevation test and
//! keeps the maximum arriving value.
//!
//! For target `p` and centre `c` within the window,
//!
//! ```text
//! out(p) = max { accum(c) · exp(-d²(c,p) / 2σ²) : elev(p) < elev(c) + rise }
//! ```
//!
//! with `d` measured in cells. The centre weight is 1 so `out(p) ≥ accum(p)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hydrology::AccumGrid;
use crate::raster::Grid;

pub const DEFAULT_KERNEL_SIZE: usize = 41;
pub const DEFAULT_RISE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloodSpreadConfig {
    /// Window side in cells; odd.
    pub kernel_size: usize,
    /// Water rise above a centre cell, metres.
    pub rise: f64,
    /// Gaussian standard deviation in cells.
    pub sigma: f64,
}

impl Default for FloodSpreadConfig {
    fn default() -> Self {
        Self::with_kernel(DEFAULT_KERNEL_SIZE, DEFAULT_RISE)
    }
}

impl FloodSpreadConfig {
    /// `sigma` defaults to `(kernel_size - 1) / 6`.
    pub fn with_kernel(kernel_size: usize, rise: f64) -> Self {
        FloodSpreadConfig {
            kernel_size,
            rise,
            sigma: Self::default_sigma(kernel_size),
        }
    }

    pub fn default_sigma(kernel_size: usize) -> f64 {
        // A 1×1 window never evaluates an off-centre weight; any positive
        // sigma will do there.
        if kernel_size <= 1 {
            1.0
        } else {
            (kernel_size - 1) as f64 / 6.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel_size == 0 || self.kernel_size.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "kernel size must be odd and ≥ 1, got {}",
                self.kernel_size
            )));
        }
        if !(self.rise > 0.0 && self.rise.is_finite()) {
            return Err(Error::Config(format!("rise must be positive, got {}", self.rise)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    /// Weight for a squared offset of `d2` cells².
    #[inline]
    pub fn weight(&self, d2: i64) -> f64 {
        (-(d2 as f64) / (2.0 * self.sigma * self.sigma)).exp()
    }
}

struct Offset {
    dr: isize,
    dc: isize,
    weight: f64,
    /// Largest weight among this and all later offsets.
    remaining: f64,
}

/// Window offsets sorted by decreasing weight (ties in raster order).
fn offsets(config: &FloodSpreadConfig) -> Vec<Offset> {
    let half = (config.kernel_size / 2) as isize;
    let mut out: Vec<Offset> = (-half..=half)
        .flat_map(|dr| (-half..=half).map(move |dc| (dr, dc)))
        .map(|(dr, dc)| Offset {
            dr,
            dc,
            weight: config.weight((dr * dr + dc * dc) as i64),
            remaining: 0.0,
        })
        .collect();
    out.sort_by(|a, b| {
        let ka = a.dr * a.dr + a.dc * a.dc;
        let kb = b.dr * b.dr + b.dc * b.dc;
        ka.cmp(&kb).then(a.dr.cmp(&b.dr)).then(a.dc.cmp(&b.dc))
    });
    // Not assuming `exp` is monotone to the last ulp.
    let mut running = 0.0f64;
    for o in out.iter_mut().rev() {
        running = running.max(o.weight);
        o.remaining = running;
    }
    out
}

/// Separable sliding maximum over a `size × size` window clipped at the
/// grid edges; invalid cells count as −∞.
fn window_max(values: &[f64], w: usize, h: usize, size: usize) -> Vec<f64> {
    let half = size / 2;
    let mut rows = vec![f64::NEG_INFINITY; w * h];
    rows.par_chunks_mut(w).enumerate().for_each(|(r, out)| {
        sliding_max_1d(&values[r * w..(r + 1) * w], half, out);
    });
    let mut cols_t = vec![f64::NEG_INFINITY; w * h];
    // Transpose so the second pass is also contiguous.
    let mut transposed = vec![0.0; w * h];
    for r in 0..h {
        for c in 0..w {
            transposed[c * h + r] = rows[r * w + c];
        }
    }
    cols_t.par_chunks_mut(h).enumerate().for_each(|(c, out)| {
        sliding_max_1d(&transposed[c * h..(c + 1) * h], half, out);
    });
    let mut result = vec![0.0; w * h];
    for c in 0..w {
        for r in 0..h {
            result[r * w + c] = cols_t[c * h + r];
        }
    }
    result
}

/// Monotone-deque running maximum of `src[i-half ..= i+half]`.
fn sliding_max_1d(src: &[f64], half: usize, out: &mut [f64]) {
    let n = src.len();
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut next = 0usize;
    for (i, slot) in out.iter_mut().enumerate() {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            while deque.back().is_some_and(|&b| src[b] <= src[next]) {
                deque.pop_back();
            }
            deque.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(half);
        while deque.front().is_some_and(|&f| f < lo) {
            deque.pop_front();
        }
        *slot = src[*deque.front().unwrap()];
    }
}

/// Flooding flow accumulation of `accum` over `dem`.
///
/// A cell is excluded (as centre and as target) when either layer is nodata
/// there; excluded cells are nodata in the output, which uses the
/// accumulation grid's sentinel.
///
/// Offsets are visited in decreasing weight and the scan for a target stops
/// once the largest accumulation anywhere in its window, times the current
/// weight, cannot beat the running maximum. Rounding is monotone, so for
/// non-negative accumulations the result is bit-identical to the exhaustive
/// double loop.
pub fn flooding_flow_accumulation(
    dem: &Grid,
    accum: &AccumGrid,
    config: &FloodSpreadConfig,
) -> Result<Grid> {
    config.validate()?;
    if dem.width != accum.width || dem.height != accum.height || dem.transform != accum.transform {
        return Err(Error::DimensionMismatch(format!(
            "dem {}×{} vs accumulation {}×{}",
            dem.width, dem.height, accum.width, accum.height
        )));
    }
    let (w, h) = (dem.width, dem.height);
    let valid: Vec<bool> = (0..w * h)
        .map(|i| dem.is_valid_at(i) && accum.is_valid_at(i))
        .collect();
    let masked: Vec<f64> = (0..w * h)
        .map(|i| if valid[i] { accum.values[i] } else { f64::NEG_INFINITY })
        .collect();
    let bound = window_max(&masked, w, h, config.kernel_size);
    let offs = offsets(config);
    let rise = config.rise;

    let mut out = vec![accum.nodata; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(r, out_row)| {
        for (c, slot) in out_row.iter_mut().enumerate() {
            let p = r * w + c;
            if !valid[p] {
                continue;
            }
            let elev_p = dem.values[p];
            let cap = bound[p];
            let mut best = f64::NEG_INFINITY;
            for o in &offs {
                if cap >= 0.0 && cap * o.remaining <= best {
                    break;
                }
                let (rr, cc) = (r as isize + o.dr, c as isize + o.dc);
                if rr < 0 || cc < 0 || rr >= h as isize || cc >= w as isize {
                    continue;
                }
                let q = rr as usize * w + cc as usize;
                if !valid[q] || !(elev_p < dem.values[q] + rise) {
                    continue;
                }
                let v = accum.values[q] * o.weight;
                if v > best {
                    best = v;
                }
            }
            *slot = best;
        }
    });
    Ok(accum.with_values(out))
}
