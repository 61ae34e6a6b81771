use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{carve_culvert, simulate, velocity_field, CulvertEdit, Discharge, InflowBoundary, SimConfig, SimOutput};
use crate::error::{Error, Result};
use crate::raster::{read_ascii_grid, write_ascii_grid, Grid};

/// Inflow used by the shipped highway example, m³/s.
pub const EXAMPLE_INFLOW_DISCHARGE: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioInflow {
    pub segment: [(f64, f64); 2],
    /// Constant m³/s; give this or `hydrograph`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discharge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hydrograph: Option<Vec<(f64, f64)>>,
}

impl ScenarioInflow {
    pub fn to_boundary(&self) -> Result<InflowBoundary> {
        let discharge = match (&self.discharge, &self.hydrograph) {
            (Some(q), None) => Discharge::Constant(*q),
            (None, Some(h)) => Discharge::Hydrograph(h.clone()),
            _ => {
                return Err(Error::Config(
                    "inflow needs exactly one of `discharge` or `hydrograph`".into(),
                ))
            }
        };
        Ok(InflowBoundary {
            segment: self.segment,
            discharge,
        })
    }
}

/// Scenario file: a DEM path (relative paths resolve against the scenario
/// file's directory), one inflow line, solver settings, and optional trenches
/// carved before the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub dem: PathBuf,
    pub inflow: ScenarioInflow,
    pub config: SimConfig,
    #[serde(default)]
    pub culverts: Vec<CulvertEdit>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Scenario> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut s = Self::from_json(&text)?;
        if s.dem.is_relative() {
            if let Some(dir) = path.parent() {
                s.dem = dir.join(&s.dem);
            }
        }
        Ok(s)
    }

    /// Loads the DEM and applies the culvert edits in order.
    pub fn terrain(&self) -> Result<Grid> {
        let mut dem = read_ascii_grid(&self.dem)?;
        for edit in &self.culverts {
            dem = carve_culvert(&dem, edit)?;
        }
        Ok(dem)
    }

    pub fn run(&self) -> Result<SimOutput> {
        simulate(&self.terrain()?, &self.inflow.to_boundary()?, &self.config)
    }
}

/// Runs a scenario file and writes `depth_<t>.asc` and `speed_<t>.asc` per
/// snapshot plus `max_depth.asc` into `out_dir`. Returns the written paths in
/// order alongside the run itself.
pub fn run_scenario(path: impl AsRef<Path>, out_dir: impl AsRef<Path>) -> Result<(SimOutput, Vec<PathBuf>)> {
    let scenario = Scenario::read(path)?;
    let out = scenario.run()?;
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for s in &out.snapshots {
        let depth = dir.join(format!("depth_{}.asc", s.t));
        write_ascii_grid(&s.depth, &depth)?;
        let speed = dir.join(format!("speed_{}.asc", s.t));
        write_ascii_grid(&velocity_field(s, scenario.config.dry_depth), &speed)?;
        written.push(depth);
        written.push(speed);
    }
    let max_depth = dir.join("max_depth.asc");
    write_ascii_grid(&out.max_depth, &max_depth)?;
    written.push(max_depth);
    Ok((out, written))
}
