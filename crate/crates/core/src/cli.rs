//! Command-line front end: one subcommand per pipeline step, each a thin
//! wrapper that reads files, calls the library and writes files.

use std::ffi::OsString;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dem::{build_dem, read_xyz, DemBuildConfig, DEFAULT_AGGREGATE_FACTOR, DEFAULT_FINE_RESOLUTION};
use crate::error::{Error, Result};
use crate::flood::{flooding_flow_accumulation, FloodSpreadConfig, DEFAULT_KERNEL_SIZE, DEFAULT_RISE};
use crate::hydrology::{
    compute_flow_accumulation, compute_flow_direction, fill_depressions_with, label_watersheds, vectorize_network,
    FlowDirGrid, StreamNetwork, DEFAULT_FILL_EPSILON,
};
use crate::mosaic::{as_accumulation_seeds, derive_inlet_seeds, read_seeds, write_seeds};
use crate::raster::{read_ascii_grid, render_falsecolor, write_ascii_grid};
use crate::risk::{read_regions_geojson, score_geoglyphs, write_report_csv, write_report_tsv, DangerThreshold, DEFAULT_DANGER_THRESHOLD};
use crate::unsteady::{carve_culvert, run_scenario, CulvertEdit};

#[derive(Debug, Parser)]
#[command(name = "glyphflood", version, about = "Flash-flood screening for ground drawings on raster terrain")]
pub struct Cli {
    /// Append a JSON-lines record of this step (inputs, outputs, digests).
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Grid an `x y z` point file into a DEM (min per fine cell, min
    /// aggregation, linear gap fill).
    BuildDem {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FINE_RESOLUTION)]
        fine_res: f64,
        #[arg(long, default_value_t = DEFAULT_AGGREGATE_FACTOR)]
        factor: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fill depressions so every cell drains to the boundary.
    Fill {
        #[arg(long)]
        dem: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FILL_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// D8 flow directions (ESRI codes) of a filled DEM.
    Flowdir {
        #[arg(long)]
        dem: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Contributing-cell counts from a flow-direction grid.
    Flowacc {
        #[arg(long)]
        flowdir: PathBuf,
        /// Inlet seeds, `row col accumulation` per line.
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label each cell with the outlet it drains to.
    Watershed {
        #[arg(long)]
        flowdir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Trace channel cells into a JSON stream network.
    Vectorize {
        #[arg(long)]
        flowdir: PathBuf,
        #[arg(long)]
        accum: PathBuf,
        /// Minimum accumulation of a channel cell; no default.
        #[arg(long)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeds where a coarse network enters a fine grid.
    LinkCoarse {
        #[arg(long)]
        network: PathBuf,
        /// Any grid on the fine frame.
        #[arg(long)]
        fine: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        min_accum: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Flooding flow accumulation.
    FloodSpread {
        #[arg(long)]
        dem: PathBuf,
        #[arg(long)]
        accum: PathBuf,
        /// Window side in cells (odd).
        #[arg(long, default_value_t = DEFAULT_KERNEL_SIZE)]
        kernel: usize,
        /// Water rise in metres.
        #[arg(long, default_value_t = DEFAULT_RISE)]
        rise: f64,
        /// Gaussian sigma in cells [default: (kernel - 1) / 6].
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank regions by maximum flooding accumulation.
    Score {
        #[arg(long)]
        ffa: PathBuf,
        /// GeoJSON FeatureCollection of polygons.
        #[arg(long)]
        regions: PathBuf,
        /// Danger threshold as a cell count.
        #[arg(long, default_value_t = DEFAULT_DANGER_THRESHOLD)]
        threshold: f64,
        /// Danger threshold as an area in m²; overrides `--threshold`.
        #[arg(long, conflicts_with = "threshold")]
        threshold_area: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Optional `name<TAB>log10_max_ffa` table.
        #[arg(long)]
        tsv: Option<PathBuf>,
    },
    /// Run a JSON scenario with the 2D flow solver.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Cut a culvert trench into a DEM.
    Carve {
        #[arg(long)]
        dem: PathBuf,
        /// Polyline vertices as `x,y`.
        #[arg(long, num_args = 1.., required = true, value_parser = parse_point)]
        path: Vec<(f64, f64)>,
        #[arg(long)]
        width: f64,
        #[arg(long)]
        invert_drop: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// False-colour PPM image of a grid.
    Render {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DANGER_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_point(s: &str) -> std::result::Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(x)?, p(y)?))
}

/// Files a step read and wrote.
#[derive(Debug, Default)]
pub struct StepFiles {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::BuildDem { .. } => "build-dem",
            Command::Fill { .. } => "fill",
            Command::Flowdir { .. } => "flowdir",
            Command::Flowacc { .. } => "flowacc",
            Command::Watershed { .. } => "watershed",
            Command::Vectorize { .. } => "vectorize",
            Command::LinkCoarse { .. } => "link-coarse",
            Command::FloodSpread { .. } => "flood-spread",
            Command::Score { .. } => "score",
            Command::Simulate { .. } => "simulate",
            Command::Carve { .. } => "carve",
            Command::Render { .. } => "render",
        }
    }

    /// Executes the step.
    pub fn execute(&self) -> Result<StepFiles> {
        let files = |inputs: &[&PathBuf], outputs: &[&PathBuf]| StepFiles {
            inputs: inputs.iter().map(|p| p.to_path_buf()).collect(),
            outputs: outputs.iter().map(|p| p.to_path_buf()).collect(),
        };
        match self {
            Command::BuildDem { points, fine_res, factor, out } => {
                let cloud = read_xyz(points)?;
                let config = DemBuildConfig::covering(&cloud, *fine_res, *factor)?;
                write_ascii_grid(&build_dem(&cloud, &config)?, out)?;
                Ok(files(&[points], &[out]))
            }
            Command::Fill { dem, epsilon, out } => {
                write_ascii_grid(&fill_depressions_with(&read_ascii_grid(dem)?, *epsilon)?, out)?;
                Ok(files(&[dem], &[out]))
            }
            Command::Flowdir { dem, out } => {
                let fd = compute_flow_direction(&read_ascii_grid(dem)?)?;
                write_ascii_grid(&fd.to_code_grid(), out)?;
                Ok(files(&[dem], &[out]))
            }
            Command::Flowacc { flowdir, seeds, out } => {
                let fd = FlowDirGrid::from_code_grid(&read_ascii_grid(flowdir)?)?;
                let seed_list = match seeds {
                    Some(p) => as_accumulation_seeds(&read_seeds(p)?),
                    None => Vec::new(),
                };
                write_ascii_grid(&compute_flow_accumulation(&fd, &seed_list)?, out)?;
                let mut inputs = vec![flowdir];
                inputs.extend(seeds.iter());
                Ok(files(&inputs, &[out]))
            }
            Command::Watershed { flowdir, out } => {
                let fd = FlowDirGrid::from_code_grid(&read_ascii_grid(flowdir)?)?;
                write_ascii_grid(&label_watersheds(&fd)?, out)?;
                Ok(files(&[flowdir], &[out]))
            }
            Command::Vectorize { flowdir, accum, threshold, out } => {
                let fd = FlowDirGrid::from_code_grid(&read_ascii_grid(flowdir)?)?;
                vectorize_network(&read_ascii_grid(accum)?, &fd, *threshold)?.write_json(out)?;
                Ok(files(&[flowdir, accum], &[out]))
            }
            Command::LinkCoarse { network, fine, min_accum, out } => {
                let net = StreamNetwork::read_json(network)?;
                let seeds = derive_inlet_seeds(&net, &net.frame, &read_ascii_grid(fine)?, *min_accum)?;
                write_seeds(&seeds, out)?;
                Ok(files(&[network, fine], &[out]))
            }
            Command::FloodSpread { dem, accum, kernel, rise, sigma, out } => {
                let mut config = FloodSpreadConfig::with_kernel(*kernel, *rise);
                if let Some(s) = sigma {
                    config.sigma = *s;
                }
                let ffa = flooding_flow_accumulation(&read_ascii_grid(dem)?, &read_ascii_grid(accum)?, &config)?;
                write_ascii_grid(&ffa, out)?;
                Ok(files(&[dem, accum], &[out]))
            }
            Command::Score { ffa, regions, threshold, threshold_area, out, tsv } => {
                let grid = read_ascii_grid(ffa)?;
                let danger = match threshold_area {
                    Some(a) => DangerThreshold::Area(*a),
                    None => DangerThreshold::Cells(*threshold),
                };
                let cs = grid.transform.cell_size;
                eprintln!("danger threshold: {}", danger.describe(cs));
                let reports = score_geoglyphs(&grid, &read_regions_geojson(regions)?, danger.cells(cs))?;
                write_report_csv(&reports, out)?;
                let mut outputs = vec![out];
                if let Some(t) = tsv {
                    write_report_tsv(&reports, t)?;
                    outputs.push(t);
                }
                Ok(files(&[ffa, regions], &outputs))
            }
            Command::Simulate { scenario, out_dir } => {
                let (run, written) = run_scenario(scenario, out_dir)?;
                if let Some(b) = run.balances.last() {
                    eprintln!(
                        "volume in {:.6} m³, out {:.6} m³, stored {:.6} m³ (residual {:.3e})",
                        b.inflow,
                        b.outflow,
                        b.stored,
                        b.relative_error()
                    );
                }
                Ok(StepFiles {
                    inputs: vec![scenario.clone()],
                    outputs: written,
                })
            }
            Command::Carve { dem, path, width, invert_drop, out } => {
                let edit = CulvertEdit {
                    path: path.clone(),
                    width: *width,
                    invert_drop: *invert_drop,
                };
                write_ascii_grid(&carve_culvert(&read_ascii_grid(dem)?, &edit)?, out)?;
                Ok(files(&[dem], &[out]))
            }
            Command::Render { grid, threshold, out } => {
                render_falsecolor(&read_ascii_grid(grid)?, *threshold, out)?;
                Ok(files(&[grid], &[out]))
            }
        }
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Serialize)]
struct FileRecord {
    path: PathBuf,
    sha256: String,
}

#[derive(Serialize)]
struct StepRecord<'a> {
    command: &'a str,
    inputs: Vec<FileRecord>,
    outputs: Vec<FileRecord>,
    parameters: serde_json::Value,
}

fn append_manifest(manifest: &Path, command: &Command, files: &StepFiles) -> Result<()> {
    let digest = |paths: &[PathBuf]| -> Result<Vec<FileRecord>> {
        paths
            .iter()
            .map(|p| {
                Ok(FileRecord {
                    path: p.clone(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect()
    };
    let parameters = match serde_json::to_value(command)? {
        // Externally tagged enum: unwrap `{ "fill": {...} }`.
        serde_json::Value::Object(mut m) => m.remove(command.name()).unwrap_or_default(),
        other => other,
    };
    let record = StepRecord {
        command: command.name(),
        inputs: digest(&files.inputs)?,
        outputs: digest(&files.outputs)?,
        parameters,
    };
    let line = serde_json::to_string(&record)? + "\n";
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(manifest)
        .map_err(|e| Error::io(manifest, e))?;
    f.write_all(line.as_bytes()).map_err(|e| Error::io(manifest, e))
}

/// Runs a parsed command line, honouring `--threads` and `--manifest`.
pub fn run(cli: &Cli) -> Result<()> {
    let work = || -> Result<()> {
        let files = cli.command.execute()?;
        if let Some(m) = &cli.manifest {
            append_manifest(m, &cli.command, &files)?;
        }
        Ok(())
    };
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Process exit code: 0 success, 1 usage error, 2 data error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return 1;
    }
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
