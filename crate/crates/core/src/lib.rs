//! Raster hydrology for flash-flood screening of ground drawings on desert
//! pampa: LiDAR points to DEM, D8 drainage, a windowed "flooding flow
//! accumulation" danger proxy, per-region risk ranking, and a small
//! local-inertial 2D flow solver for testing terrain edits such as culverts.
//!
//! Each stage is a plain function over [`raster::Grid`]s; the `glyphflood`
//! binary wraps them as one subcommand per step.

// `!(x > 0.0)` is the idiom used throughout to reject NaN along with bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dem;
pub mod error;
pub mod flood;
pub mod hydrology;
pub mod mosaic;
pub mod raster;
pub mod risk;
pub mod synthetic;
pub mod unsteady;

pub use error::{Error, Result};
pub use raster::{CellIndex, GeoTransform, Grid, GridFrame};
