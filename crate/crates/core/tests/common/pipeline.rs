//! A small end-to-end run of every subcommand through the built binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use glyphflood::raster::format_ascii_grid;
use glyphflood::{GeoTransform, Grid};
use rand::Rng;

pub const BIN: &str = env!("CARGO_BIN_EXE_glyphflood");

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

/// Valley falling east along y = 12 with a shallow pit, sampled at random
/// points on a 24 m square.
pub fn terrain(x: f64, y: f64) -> f64 {
    let pit = 0.4 * (-((x - 15.0).powi(2) + (y - 7.0).powi(2)) / 4.0).exp();
    10.0 + 0.05 * (24.0 - x) + 0.1 * (y - 12.0).abs() - pit
}

pub fn write_inputs(dir: &Path) {
    let mut rng = super::rng(2024);
    let mut xyz = String::new();
    for _ in 0..9000 {
        let (x, y) = (rng.gen_range(0.0..24.0), rng.gen_range(0.0..24.0));
        let z = terrain(x, y) + rng.gen_range(0.0..0.02);
        let _ = writeln!(xyz, "{x} {y} {z}");
    }
    fs::write(dir.join("points.xyz"), xyz).unwrap();

    // Regional 4 m grid whose valley enters the survey from the west.
    let mut coarse = Grid::filled(15, 6, GeoTransform::new(-30.0, 0.0, 4.0).unwrap(), -9999.0, 0.0).unwrap();
    for r in 0..coarse.height {
        for c in 0..coarse.width {
            let (x, y) = coarse.cell_center(r, c);
            coarse.set(r, c, 12.0 - 0.05 * x + 0.1 * (y - 10.0).abs());
        }
    }
    fs::write(dir.join("coarse.asc"), format_ascii_grid(&coarse)).unwrap();

    let glyphs = r#"{"type": "FeatureCollection", "features": [
        {"type": "Feature", "properties": {"id": "a", "name": "channel figure"},
         "geometry": {"type": "Polygon", "coordinates": [[[8, 10], [14, 10], [14, 14], [8, 14], [8, 10]]]}},
        {"type": "Feature", "properties": {"id": "b", "name": "hillside figure"},
         "geometry": {"type": "Polygon", "coordinates": [[[3, 19], [9, 19], [6, 23], [3, 19]]]}}
    ]}"#;
    fs::write(dir.join("glyphs.geojson"), glyphs).unwrap();

    let scenario = r#"{"dem": "carved.asc",
        "inflow": {"segment": [[0.5, 10], [0.5, 14]], "discharge": 2.0},
        "config": {"duration": 60, "output_interval": 30}}"#;
    fs::write(dir.join("scenario.json"), scenario).unwrap();
}

/// Every step of the pipeline, in order, as argument lists relative to `dir`.
pub fn steps(dir: &Path) -> Vec<Vec<String>> {
    let p = |name: &str| dir.join(name).display().to_string();
    vec![
        vec!["build-dem".into(), "--points".into(), p("points.xyz"), "--fine-res".into(), "0.25".into(), "--factor".into(), "4".into(), "--out".into(), p("dem.asc")],
        vec!["fill".into(), "--dem".into(), p("dem.asc"), "--out".into(), p("filled.asc")],
        vec!["flowdir".into(), "--dem".into(), p("filled.asc"), "--out".into(), p("flowdir.asc")],
        vec!["fill".into(), "--dem".into(), p("coarse.asc"), "--out".into(), p("coarse_filled.asc")],
        vec!["flowdir".into(), "--dem".into(), p("coarse_filled.asc"), "--out".into(), p("coarse_flowdir.asc")],
        vec!["flowacc".into(), "--flowdir".into(), p("coarse_flowdir.asc"), "--out".into(), p("coarse_acc.asc")],
        vec!["vectorize".into(), "--flowdir".into(), p("coarse_flowdir.asc"), "--accum".into(), p("coarse_acc.asc"), "--threshold".into(), "4".into(), "--out".into(), p("coarse_net.json")],
        vec!["link-coarse".into(), "--network".into(), p("coarse_net.json"), "--fine".into(), p("filled.asc"), "--out".into(), p("seeds.txt")],
        vec!["flowacc".into(), "--flowdir".into(), p("flowdir.asc"), "--seeds".into(), p("seeds.txt"), "--out".into(), p("acc.asc")],
        vec!["watershed".into(), "--flowdir".into(), p("flowdir.asc"), "--out".into(), p("watershed.asc")],
        vec!["vectorize".into(), "--flowdir".into(), p("flowdir.asc"), "--accum".into(), p("acc.asc"), "--threshold".into(), "20".into(), "--out".into(), p("network.json")],
        vec!["flood-spread".into(), "--dem".into(), p("filled.asc"), "--accum".into(), p("acc.asc"), "--out".into(), p("ffa.asc")],
        vec!["score".into(), "--ffa".into(), p("ffa.asc"), "--regions".into(), p("glyphs.geojson"), "--out".into(), p("report.csv"), "--tsv".into(), p("report.tsv")],
        vec!["carve".into(), "--dem".into(), p("filled.asc"), "--path".into(), "2,12".into(), "20,12".into(), "--width".into(), "2".into(), "--invert-drop".into(), "0.3".into(), "--out".into(), p("carved.asc")],
        vec!["simulate".into(), "--scenario".into(), p("scenario.json"), "--out-dir".into(), p("sim")],
        vec!["render".into(), "--grid".into(), p("ffa.asc"), "--out".into(), p("ffa.ppm")],
    ]
}

/// Writes inputs into `dir`, runs every step with `--threads` and a
/// manifest, and returns each produced file's bytes keyed by relative path.
/// The directory prefix is stripped from the manifest so runs in different
/// directories compare equal.
pub fn run_pipeline(dir: &Path, threads: usize) -> BTreeMap<String, Vec<u8>> {
    write_inputs(dir);
    let inputs: Vec<PathBuf> = ["points.xyz", "coarse.asc", "glyphs.geojson", "scenario.json"]
        .iter()
        .map(|n| dir.join(n))
        .collect();
    let manifest = dir.join("manifest.jsonl");
    let threads = threads.to_string();
    for step in steps(dir) {
        let mut args: Vec<&str> = vec!["--threads", &threads, "--manifest", manifest.to_str().unwrap()];
        args.extend(step.iter().map(String::as_str));
        let out = run(&args);
        assert!(
            out.status.success(),
            "{:?} failed: {}",
            step,
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let mut files = BTreeMap::new();
    collect(dir, dir, &inputs, &mut files);
    let prefix = dir.display().to_string();
    let m = files.get_mut("manifest.jsonl").unwrap();
    *m = String::from_utf8(m.clone()).unwrap().replace(&prefix, "<dir>").into_bytes();
    files
}

fn collect(root: &Path, dir: &Path, skip: &[PathBuf], out: &mut BTreeMap<String, Vec<u8>>) {
    let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect(root, &path, skip, out);
        } else if !skip.contains(&path) {
            let rel = path.strip_prefix(root).unwrap().display().to_string();
            out.insert(rel, fs::read(&path).unwrap());
        }
    }
}
