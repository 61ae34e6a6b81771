//! Explicit local-inertial 2D flow over a DEM.
//!
//! Water depth lives at cell centres, unit discharges on cell faces. Each
//! step updates face discharge from the water-surface gradient with a
//! semi-implicit Manning friction term,
//!
//! ```text
//! q' = (q - g·h_f·Δt·∂η/∂s) / (1 + g·Δt·n²·|q| / h_f^(7/3))
//! ```
//!
//! then moves water by the face-flux divergence. `h_f` is the flow depth
//! across the face, `max(η) - max(z)`. Outgoing fluxes are scaled down where
//! a cell would otherwise go negative. The time step follows
//! `Δt = cfl·Δx / √(g·h_max)`.
//!
//! Sign conventions: `qx` is positive toward increasing column (east),
//! `qy` toward increasing row (south).

mod culvert;
mod scenario;

pub use culvert::{carve_culvert, culvert_cells, CulvertEdit};
pub use scenario::{run_scenario, Scenario, ScenarioInflow, EXAMPLE_INFLOW_DISCHARGE};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{CellIndex, GeoTransform, Grid};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq)]
pub enum Discharge {
    /// m³/s for the whole run.
    Constant(f64),
    /// `(t seconds, m³/s)` breakpoints, linearly interpolated and held
    /// constant outside their range.
    Hydrograph(Vec<(f64, f64)>),
}

impl Discharge {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Discharge::Constant(q) => *q,
            Discharge::Hydrograph(points) => {
                let Some(&(t0, q0)) = points.first() else { return 0.0 };
                if t <= t0 {
                    return q0;
                }
                for pair in points.windows(2) {
                    let ((ta, qa), (tb, qb)) = (pair[0], pair[1]);
                    if t <= tb {
                        return if tb > ta { qa + (qb - qa) * (t - ta) / (tb - ta) } else { qb };
                    }
                }
                points.last().unwrap().1
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Discharge::Constant(q) => *q >= 0.0 && q.is_finite(),
            Discharge::Hydrograph(points) => {
                !points.is_empty()
                    && points.iter().all(|&(t, q)| t.is_finite() && q >= 0.0 && q.is_finite())
                    && points.windows(2).all(|p| p[1].0 >= p[0].0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(
                "discharge must be ≥ 0 with non-decreasing hydrograph times".into(),
            ))
        }
    }
}

/// Discharge applied along a line segment, in world metres.
#[derive(Debug, Clone, PartialEq)]
pub struct InflowBoundary {
    pub segment: [(f64, f64); 2],
    pub discharge: Discharge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Manning roughness, s·m^(-1/3).
    #[serde(default = "default_manning_n")]
    pub manning_n: f64,
    /// Simulated seconds.
    pub duration: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Faces shallower than this carry no flow; cells at or below it are dry.
    #[serde(default = "default_dry_depth")]
    pub dry_depth: f64,
    /// Seconds between snapshots.
    pub output_interval: f64,
    /// Upper bound on a single step, seconds. Keeps the first steps onto a
    /// dry surface bounded.
    #[serde(default = "default_max_timestep")]
    pub max_timestep: f64,
}

fn default_manning_n() -> f64 {
    SimConfig::DEFAULT_MANNING_N
}
fn default_cfl() -> f64 {
    SimConfig::DEFAULT_CFL
}
fn default_dry_depth() -> f64 {
    SimConfig::DEFAULT_DRY_DEPTH
}
fn default_max_timestep() -> f64 {
    SimConfig::DEFAULT_MAX_TIMESTEP
}

impl SimConfig {
    pub const DEFAULT_MANNING_N: f64 = 0.035;
    pub const DEFAULT_CFL: f64 = 0.7;
    pub const DEFAULT_DRY_DEPTH: f64 = 1e-4;
    pub const DEFAULT_MAX_TIMESTEP: f64 = 1.0;

    pub fn new(duration: f64, output_interval: f64) -> Self {
        SimConfig {
            manning_n: Self::DEFAULT_MANNING_N,
            duration,
            cfl: Self::DEFAULT_CFL,
            dry_depth: Self::DEFAULT_DRY_DEPTH,
            output_interval,
            max_timestep: Self::DEFAULT_MAX_TIMESTEP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.manning_n > 0.0 && self.manning_n.is_finite()) {
            return err("manning_n must be positive");
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return err("cfl must be in (0, 1]");
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return err("duration must be positive");
        }
        if !(self.dry_depth > 0.0 && self.dry_depth.is_finite()) {
            return err("dry_depth must be positive");
        }
        if !(self.output_interval > 0.0 && self.output_interval.is_finite()) {
            return err("output_interval must be positive");
        }
        if !(self.max_timestep > 0.0) {
            return err("max_timestep must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    /// Water depth, metres, on the DEM frame.
    pub depth: Grid,
    /// East-face unit discharge, m²/s; `width + 1` columns.
    pub qx: Grid,
    /// South-face unit discharge, m²/s; `height + 1` rows.
    pub qy: Grid,
    pub t: f64,
}

impl FlowState {
    pub fn dry(dem: &Grid) -> Result<FlowState> {
        let t = &dem.transform;
        let half = t.cell_size / 2.0;
        Ok(FlowState {
            depth: Grid::filled(dem.width, dem.height, *t, dem.nodata, 0.0)?,
            qx: Grid::filled(
                dem.width + 1,
                dem.height,
                GeoTransform::new(t.origin_x - half, t.origin_y, t.cell_size)?,
                dem.nodata,
                0.0,
            )?,
            qy: Grid::filled(
                dem.width,
                dem.height + 1,
                GeoTransform::new(t.origin_x, t.origin_y - half, t.cell_size)?,
                dem.nodata,
                0.0,
            )?,
            t: 0.0,
        })
    }

    /// Σ depth · cell area, summed in row-major order.
    pub fn stored_volume(&self) -> f64 {
        let a = self.depth.transform.cell_size.powi(2);
        self.depth.values.iter().map(|h| h * a).sum()
    }
}

/// Running totals in m³ at a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VolumeBalance {
    pub inflow: f64,
    pub outflow: f64,
    pub stored: f64,
}

impl VolumeBalance {
    /// `|stored + outflow - inflow| / inflow`, or the absolute residual when
    /// nothing has entered.
    pub fn relative_error(&self) -> f64 {
        let residual = (self.stored + self.outflow - self.inflow).abs();
        if self.inflow > 0.0 {
            residual / self.inflow
        } else {
            residual
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub snapshots: Vec<FlowState>,
    /// Volume totals, one per snapshot.
    pub balances: Vec<VolumeBalance>,
    /// Deepest water seen in each cell over the run.
    pub max_depth: Grid,
    /// Volume that left each cell through its faces over the run, m³.
    pub throughput: Grid,
}

/// Cells a segment passes through.
///
/// A cell is hit when the segment overlaps its square over a positive length
/// and the middle of that overlap lies in the half-open square
/// `[west, east) × [south, north)`; a segment along a shared edge goes to
/// one side only. A zero-length segment hits the cell containing it.
pub fn segment_cells(grid: &Grid, a: (f64, f64), b: (f64, f64)) -> Vec<CellIndex> {
    let frame = grid.frame();
    if a == b {
        return frame.locate(a.0, a.1).into_iter().collect();
    }
    let t = &grid.transform;
    let cs = t.cell_size;
    let col_of = |x: f64| ((x - t.origin_x) / cs).floor() as isize;
    let up_of = |y: f64| ((y - t.origin_y) / cs).floor() as isize;
    let c0 = (col_of(a.0.min(b.0)) - 1).max(0);
    let c1 = (col_of(a.0.max(b.0)) + 1).min(grid.width as isize - 1);
    let u0 = (up_of(a.1.min(b.1)) - 1).max(0);
    let u1 = (up_of(a.1.max(b.1)) + 1).min(grid.height as isize - 1);
    let mut cells = Vec::new();
    for up in (u0..=u1).rev() {
        for c in c0..=c1 {
            let x0 = t.origin_x + c as f64 * cs;
            let y0 = t.origin_y + up as f64 * cs;
            let (x1, y1) = (x0 + cs, y0 + cs);
            if let Some((ta, tb)) = clip(a, b, x0, y0, x1, y1) {
                if ta < tb {
                    let tm = 0.5 * (ta + tb);
                    let mx = a.0 + tm * (b.0 - a.0);
                    let my = a.1 + tm * (b.1 - a.1);
                    if mx >= x0 && mx < x1 && my >= y0 && my < y1 {
                        cells.push(CellIndex::new(grid.height - 1 - up as usize, c as usize));
                    }
                }
            }
        }
    }
    cells
}

fn clip(a: (f64, f64), b: (f64, f64), x0: f64, y0: f64, x1: f64, y1: f64) -> Option<(f64, f64)> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for (p, q) in [(-dx, a.0 - x0), (dx, x1 - a.0), (-dy, a.1 - y0), (dy, y1 - a.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                lo = lo.max(r);
            } else {
                hi = hi.min(r);
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Per-face Manning/inertial update. Returns the new discharge.
#[inline]
fn inertial_update(q: f64, h_flow: f64, surface_slope: f64, dt: f64, n2: f64) -> f64 {
    let num = q - GRAVITY * h_flow * dt * surface_slope;
    // h^(7/3) as h²·∛h, cheaper than powf.
    let den = 1.0 + GRAVITY * dt * n2 * q.abs() / (h_flow * h_flow * h_flow.cbrt());
    num / den
}

/// Runs the solver from a dry start and returns snapshots at `t = 0`, every
/// `output_interval`, and at `duration`.
///
/// Nodata terrain acts as a wall. Grid edges are free outfalls: water leaves
/// with the surface slope set to the outward bed slope at the edge (zero
/// where the bed does not fall outward, which closes that stretch of edge).
pub fn simulate(dem: &Grid, inflow: &InflowBoundary, config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    inflow.discharge.validate()?;
    let inflow_cells = segment_cells(dem, inflow.segment[0], inflow.segment[1])
        .into_iter()
        .filter(|c| dem.value(c.row, c.col).is_some())
        .collect::<Vec<_>>();
    if inflow_cells.is_empty() {
        return Err(Error::OutsideExtent);
    }
    let mut solver = Solver::new(dem, &inflow_cells, config)?;
    let mut out = SimOutput {
        snapshots: vec![solver.state.clone()],
        balances: vec![solver.balance()],
        max_depth: solver.state.depth.clone(),
        throughput: solver.state.depth.clone(),
    };
    let mut next_output = config.output_interval.min(config.duration);
    while solver.state.t < config.duration {
        let dt = solver.stable_dt().min(next_output - solver.state.t);
        let q0 = inflow.discharge.at(solver.state.t);
        let q1 = inflow.discharge.at(solver.state.t + dt);
        solver.step(dt, 0.5 * (q0 + q1), &mut out)?;
        if solver.state.t >= next_output {
            // Land exactly on the output time.
            solver.state.t = next_output;
            out.snapshots.push(solver.state.clone());
            out.balances.push(solver.balance());
            next_output = (next_output + config.output_interval).min(config.duration);
        }
    }
    Ok(out)
}

struct Solver<'a> {
    dem: &'a Grid,
    config: &'a SimConfig,
    wet_ok: Vec<bool>,
    inflow_cells: Vec<usize>,
    state: FlowState,
    inflow_volume: f64,
    outflow_volume: f64,
    // Scratch buffers swapped with the state each step.
    qx_next: Vec<f64>,
    qy_next: Vec<f64>,
    depth_next: Vec<f64>,
    factor: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Params {
    dx: f64,
    dt: f64,
    n2: f64,
    dry: f64,
}

impl<'a> Solver<'a> {
    fn new(dem: &'a Grid, inflow_cells: &[CellIndex], config: &'a SimConfig) -> Result<Self> {
        let (w, h) = (dem.width, dem.height);
        Ok(Solver {
            dem,
            config,
            wet_ok: (0..dem.len()).map(|i| dem.is_valid_at(i)).collect(),
            inflow_cells: inflow_cells.iter().map(|c| dem.index(c.row, c.col)).collect(),
            state: FlowState::dry(dem)?,
            inflow_volume: 0.0,
            outflow_volume: 0.0,
            qx_next: vec![0.0; (w + 1) * h],
            qy_next: vec![0.0; w * (h + 1)],
            depth_next: vec![0.0; w * h],
            factor: vec![1.0; w * h],
        })
    }

    fn balance(&self) -> VolumeBalance {
        VolumeBalance {
            inflow: self.inflow_volume,
            outflow: self.outflow_volume,
            stored: self.state.stored_volume(),
        }
    }

    fn stable_dt(&self) -> f64 {
        let h_max = self
            .state
            .depth
            .values
            .iter()
            .fold(0.0f64, |m, &h| m.max(h))
            .max(self.config.dry_depth);
        let dx = self.dem.transform.cell_size;
        (self.config.cfl * dx / (GRAVITY * h_max).sqrt()).min(self.config.max_timestep)
    }

    fn step(&mut self, dt: f64, discharge: f64, out: &mut SimOutput) -> Result<()> {
        let Solver {
            dem,
            config,
            wet_ok: ok,
            inflow_cells,
            state,
            inflow_volume,
            outflow_volume,
            qx_next: qx,
            qy_next: qy,
            depth_next,
            factor,
        } = self;
        let (w, h) = (dem.width, dem.height);
        let dx = dem.transform.cell_size;
        let p = Params {
            dx,
            dt,
            n2: config.manning_n * config.manning_n,
            dry: config.dry_depth,
        };
        let z = &dem.values;
        let ok = &ok[..];
        let depth = &state.depth.values;

        // Faces along x: row r, face f sits west of column f.
        let qx_old = &state.qx.values;
        qx.par_chunks_mut(w + 1).enumerate().for_each(|(r, row)| {
            let zr = &z[r * w..(r + 1) * w];
            let hr = &depth[r * w..(r + 1) * w];
            let okr = &ok[r * w..(r + 1) * w];
            let qo = &qx_old[r * (w + 1)..(r + 1) * (w + 1)];
            for f in 1..w {
                row[f] = interior_face(zr[f - 1], hr[f - 1], okr[f - 1], zr[f], hr[f], okr[f], qo[f], p);
            }
            let inner_w = (w > 1 && okr[1]).then(|| zr[1]);
            row[0] = -outfall_face(zr[0], hr[0], okr[0], inner_w, -qo[0], p);
            let inner_e = (w > 1 && okr[w - 2]).then(|| zr[w - 2]);
            row[w] = outfall_face(zr[w - 1], hr[w - 1], okr[w - 1], inner_e, qo[w], p);
        });

        // Faces along y: face f sits north of row f.
        let qy_old = &state.qy.values;
        qy.par_chunks_mut(w).enumerate().for_each(|(f, row)| {
            let qo = &qy_old[f * w..(f + 1) * w];
            if f == 0 || f == h {
                let (cell_row, sign) = if f == 0 { (0, -1.0) } else { (h - 1, 1.0) };
                let inner_row = if f == 0 { 1 } else { h.wrapping_sub(2) };
                let span = |v: usize| v * w..(v + 1) * w;
                let (zc, hc, okc) = (&z[span(cell_row)], &depth[span(cell_row)], &ok[span(cell_row)]);
                let inner = (h > 1).then(|| (&z[span(inner_row)], &ok[span(inner_row)]));
                for c in 0..w {
                    let zi = inner.and_then(|(zi, oki)| oki[c].then(|| zi[c]));
                    row[c] = sign * outfall_face(zc[c], hc[c], okc[c], zi, sign * qo[c], p);
                }
            } else {
                let (a, b) = ((f - 1) * w, f * w);
                let (za, zb) = (&z[a..a + w], &z[b..b + w]);
                let (ha, hb) = (&depth[a..a + w], &depth[b..b + w]);
                let (oka, okb) = (&ok[a..a + w], &ok[b..b + w]);
                for c in 0..w {
                    row[c] = interior_face(za[c], ha[c], oka[c], zb[c], hb[c], okb[c], qo[c], p);
                }
            }
        });

        // Scale outgoing fluxes so no cell drains below zero. Each face is
        // outgoing for exactly one cell, so the scaling is order-free.
        {
            let (qx, qy) = (&*qx, &*qy);
            factor.par_chunks_mut(w).enumerate().for_each(|(r, frow)| {
                let hr = &depth[r * w..(r + 1) * w];
                for c in 0..w {
                    let demand = outgoing(w, r, c, qx, qy) * dt / dx;
                    frow[c] = if demand > hr[c] { hr[c] / demand } else { 1.0 };
                }
            });
        }
        let factor = &factor[..];
        qx.par_chunks_mut(w + 1).enumerate().for_each(|(r, row)| {
            let fr = &factor[r * w..(r + 1) * w];
            for (f, q) in row.iter_mut().enumerate() {
                let upwind = if *q > 0.0 { f.checked_sub(1) } else { (f < w).then_some(f) };
                if let Some(c) = upwind {
                    *q *= fr[c];
                }
            }
        });
        qy.par_chunks_mut(w).enumerate().for_each(|(f, row)| {
            let upwind_row = |q: f64| if q > 0.0 { f.checked_sub(1) } else { (f < h).then_some(f) };
            for (c, q) in row.iter_mut().enumerate() {
                if let Some(r) = upwind_row(*q) {
                    *q *= factor[r * w + c];
                }
            }
        });
        let (qx, qy) = (&*qx, &*qy);

        // Boundary outflow, fixed order.
        let mut boundary_out = 0.0;
        for r in 0..h {
            boundary_out += (-qx[r * (w + 1)]).max(0.0) + qx[r * (w + 1) + w].max(0.0);
        }
        for c in 0..w {
            boundary_out += (-qy[c]).max(0.0) + qy[h * w + c].max(0.0);
        }
        *outflow_volume += boundary_out * dx * dt;

        // Source depth per inflow cell.
        let source = discharge * dt / (inflow_cells.len() as f64 * dx * dx);
        *inflow_volume += discharge * dt;

        depth_next
            .par_chunks_mut(w)
            .zip(out.throughput.values.par_chunks_mut(w))
            .enumerate()
            .for_each(|(r, (drow, trow))| {
                let qxr = &qx[r * (w + 1)..(r + 1) * (w + 1)];
                let (qn, qs) = (&qy[r * w..(r + 1) * w], &qy[(r + 1) * w..(r + 2) * w]);
                let hr = &depth[r * w..(r + 1) * w];
                let okr = &ok[r * w..(r + 1) * w];
                for c in 0..w {
                    if !okr[c] {
                        drow[c] = 0.0;
                        continue;
                    }
                    let (west, east, north, south) = (qxr[c], qxr[c + 1], qn[c], qs[c]);
                    let d = hr[c] + dt * ((west - east) + (north - south)) / dx;
                    // Rounding residue only; NaN passes through to the check below.
                    drow[c] = if d < 0.0 { 0.0 } else { d };
                    let leaving = ((-west).max(0.0) + east.max(0.0)) + ((-north).max(0.0) + south.max(0.0));
                    trow[c] += leaving * dx * dt;
                }
            });
        for &i in inflow_cells.iter() {
            depth_next[i] += source;
        }
        let mut finite = true;
        for (m, &d) in out.max_depth.values.iter_mut().zip(depth_next.iter()) {
            finite &= d.is_finite();
            if d > *m {
                *m = d;
            }
        }
        finite &= qx.iter().chain(qy).all(|q| q.is_finite());

        std::mem::swap(&mut state.depth.values, depth_next);
        std::mem::swap(&mut state.qx.values, &mut self.qx_next);
        std::mem::swap(&mut state.qy.values, &mut self.qy_next);
        state.t += dt;

        if !finite {
            return Err(Error::Unstable {
                t: state.t,
                reason: "non-finite depth or discharge".into(),
                state: Box::new(state.clone()),
            });
        }
        Ok(())
    }
}

/// Sum of discharge leaving cell `(r, c)` through its four faces, m²/s.
#[inline]
fn outgoing(w: usize, r: usize, c: usize, qx: &[f64], qy: &[f64]) -> f64 {
    let west = (-qx[r * (w + 1) + c]).max(0.0);
    let east = qx[r * (w + 1) + c + 1].max(0.0);
    let north = (-qy[r * w + c]).max(0.0);
    let south = qy[(r + 1) * w + c].max(0.0);
    (west + east) + (north + south)
}

/// Discharge across the face between cells `a` and `b`, positive a → b.
#[allow(clippy::too_many_arguments)]
#[inline]
fn interior_face(za: f64, ha: f64, oka: bool, zb: f64, hb: f64, okb: bool, q: f64, p: Params) -> f64 {
    // Flow depth never exceeds the deeper side, so two dry cells carry nothing.
    if (ha <= p.dry && hb <= p.dry) || !(oka && okb) {
        return 0.0;
    }
    let (eta_a, eta_b) = (za + ha, zb + hb);
    let h_flow = eta_a.max(eta_b) - za.max(zb);
    if h_flow <= p.dry {
        return 0.0;
    }
    inertial_update(q, h_flow, (eta_b - eta_a) / p.dx, p.dt, p.n2)
}

/// Outward discharge magnitude through an edge face. `z_inner` is the bed of
/// the valid inward neighbour, if any.
#[inline]
fn outfall_face(z_cell: f64, h_cell: f64, ok: bool, z_inner: Option<f64>, q_out: f64, p: Params) -> f64 {
    if !ok || h_cell <= p.dry {
        return 0.0;
    }
    let bed_slope = z_inner.map_or(0.0, |zi| ((zi - z_cell) / p.dx).max(0.0));
    if bed_slope == 0.0 {
        return 0.0;
    }
    inertial_update(q_out.max(0.0), h_cell, -bed_slope, p.dt, p.n2).max(0.0)
}

/// Cell-centred speed in m/s; 0 where depth ≤ `dry_depth`.
pub fn velocity_field(state: &FlowState, dry_depth: f64) -> Grid {
    let (w, h) = (state.depth.width, state.depth.height);
    let values = (0..w * h)
        .map(|i| {
            let depth = state.depth.values[i];
            if depth <= dry_depth || state.depth.is_nodata(depth) {
                return 0.0;
            }
            let (r, c) = (i / w, i % w);
            let qx = 0.5 * (state.qx.values[r * (w + 1) + c] + state.qx.values[r * (w + 1) + c + 1]);
            let qy = 0.5 * (state.qy.values[r * w + c] + state.qy.values[(r + 1) * w + c]);
            let (u, v) = (qx / depth, qy / depth);
            (u * u + v * v).sqrt()
        })
        .collect();
    state.depth.with_values(values)
}
