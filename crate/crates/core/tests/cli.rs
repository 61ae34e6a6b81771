mod common;

use std::fs;
use std::path::Path;

use common::pipeline::{run, run_pipeline, steps, BIN};
use glyphflood::dem::{build_dem, read_xyz, DemBuildConfig};
use glyphflood::flood::{flooding_flow_accumulation, FloodSpreadConfig};
use glyphflood::hydrology::{
    compute_flow_accumulation, compute_flow_direction, fill_depressions, label_watersheds, vectorize_network, FlowDirGrid,
    StreamNetwork,
};
use glyphflood::mosaic::{as_accumulation_seeds, derive_inlet_seeds, format_seeds, read_seeds};
use glyphflood::raster::{falsecolor_ppm, format_ascii_grid, read_ascii_grid};
use glyphflood::risk::{format_report_csv, format_report_tsv, read_regions_geojson, score_geoglyphs};
use glyphflood::unsteady::{carve_culvert, run_scenario, CulvertEdit};
use sha2::{Digest, Sha256};

fn text(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn every_step_matches_the_library_call() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    run_pipeline(dir, 1);
    let asc = |name: &str| read_ascii_grid(dir.join(name)).unwrap();

    let cloud = read_xyz(dir.join("points.xyz")).unwrap();
    let dem = build_dem(&cloud, &DemBuildConfig::covering(&cloud, 0.25, 4).unwrap()).unwrap();
    assert_eq!(text(dir, "dem.asc"), format_ascii_grid(&dem));
    assert_eq!((dem.width, dem.height, dem.transform.cell_size), (24, 24, 1.0));

    let filled = fill_depressions(&asc("dem.asc")).unwrap();
    assert_eq!(text(dir, "filled.asc"), format_ascii_grid(&filled));
    let fd = compute_flow_direction(&filled).unwrap();
    assert_eq!(text(dir, "flowdir.asc"), format_ascii_grid(&fd.to_code_grid()));

    let coarse_fd = FlowDirGrid::from_code_grid(&asc("coarse_flowdir.asc")).unwrap();
    let coarse_net = vectorize_network(&asc("coarse_acc.asc"), &coarse_fd, 4.0).unwrap();
    assert_eq!(text(dir, "coarse_net.json"), coarse_net.to_json().unwrap() + "\n");
    let net = StreamNetwork::read_json(dir.join("coarse_net.json")).unwrap();
    let seeds = derive_inlet_seeds(&net, &net.frame, &filled, 0.0).unwrap();
    assert!(!seeds.is_empty());
    assert_eq!(text(dir, "seeds.txt"), format_seeds(&seeds));

    let acc = compute_flow_accumulation(&fd, &as_accumulation_seeds(&read_seeds(dir.join("seeds.txt")).unwrap())).unwrap();
    assert_eq!(text(dir, "acc.asc"), format_ascii_grid(&acc));
    assert_eq!(text(dir, "watershed.asc"), format_ascii_grid(&label_watersheds(&fd).unwrap()));
    let network = vectorize_network(&acc, &fd, 20.0).unwrap();
    assert_eq!(text(dir, "network.json"), network.to_json().unwrap() + "\n");

    let ffa = flooding_flow_accumulation(&filled, &acc, &FloodSpreadConfig::default()).unwrap();
    assert_eq!(text(dir, "ffa.asc"), format_ascii_grid(&ffa));

    let regions = read_regions_geojson(dir.join("glyphs.geojson")).unwrap();
    let reports = score_geoglyphs(&asc("ffa.asc"), &regions, 3257.0).unwrap();
    assert_eq!(text(dir, "report.csv"), format_report_csv(&reports));
    assert_eq!(text(dir, "report.tsv"), format_report_tsv(&reports));
    assert!(reports.windows(2).all(|w| w[0].max_ffa >= w[1].max_ffa));

    let edit = CulvertEdit {
        path: vec![(2.0, 12.0), (20.0, 12.0)],
        width: 2.0,
        invert_drop: 0.3,
    };
    assert_eq!(text(dir, "carved.asc"), format_ascii_grid(&carve_culvert(&filled, &edit).unwrap()));

    let again = dir.join("sim_lib");
    let (_, written) = run_scenario(dir.join("scenario.json"), &again).unwrap();
    assert_eq!(written.len(), 7);
    for p in written {
        let name = p.file_name().unwrap();
        assert_eq!(fs::read(&p).unwrap(), fs::read(dir.join("sim").join(name)).unwrap(), "{name:?}");
    }

    assert_eq!(fs::read(dir.join("ffa.ppm")).unwrap(), falsecolor_ppm(&ffa, 3257.0).unwrap());
}

#[test]
fn manifest_records_digests_of_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    run_pipeline(dir, 1);
    let lines: Vec<serde_json::Value> = text(dir, "manifest.jsonl")
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), steps(dir).len());
    for rec in &lines {
        assert!(rec["command"].is_string());
        assert!(rec["parameters"].is_object());
        for key in ["inputs", "outputs"] {
            for f in rec[key].as_array().unwrap() {
                let path = Path::new(f["path"].as_str().unwrap());
                if path.is_file() {
                    let digest = hex::encode(Sha256::digest(fs::read(path).unwrap()));
                    assert_eq!(f["sha256"].as_str().unwrap(), digest, "{}", path.display());
                }
            }
        }
    }
    assert_eq!(lines[11]["command"], "flood-spread");
    assert_eq!(lines[11]["parameters"]["kernel"], 41);
}

#[test]
fn exit_codes_follow_the_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let code = |args: &[&str]| run(args).status.code().unwrap();

    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert!(!run(&["frobnicate"]).stderr.is_empty());
    assert_eq!(code(&["fill", "-d", "x"]), 1);
    assert_eq!(code(&["--threads", "0", "render", "--grid", "a", "--out", "b"]), 1);
    assert_eq!(code(&["score", "--ffa", "a", "--regions", "b", "--out", "c", "--threshold", "1", "--threshold-area", "2"]), 1);

    // Each subcommand: a missing required flag is a usage error, a missing
    // input file is a data error.
    for step in steps(dir) {
        let args: Vec<&str> = step.iter().map(String::as_str).collect();
        assert_eq!(code(&args[..1]), 1, "{}", args[0]);
        assert_eq!(code(&args), 2, "{} without inputs", args[0]);
    }

    common::pipeline::write_inputs(dir);
    let pts = dir.join("points.xyz");
    let out = dir.join("o.asc");
    assert_eq!(code(&["build-dem", "--points", pts.to_str().unwrap(), "--factor", "0", "--out", out.to_str().unwrap()]), 2);
    assert_eq!(code(&["build-dem", "--points", pts.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
}

#[test]
fn binary_path_is_built() {
    assert!(Path::new(BIN).is_file());
}
