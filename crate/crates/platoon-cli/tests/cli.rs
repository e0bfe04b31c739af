//! End-to-end checks of the `platoon` binary: exit codes, bundle layout,
//! and byte-determinism of repeated runs.

use std::path::Path;
use std::process::{Command, Output};

fn platoon(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_platoon"));
    cmd.args(args);
    if let Some(dir) = out_dir {
        cmd.arg("--out").arg(dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn list_scenarios_covers_the_whole_library() {
    let out = platoon(&["list-scenarios"], None);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in platoon_core::scenario::bundled_scenario_names() {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn simulate_writes_a_complete_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = platoon(&["simulate", "gmm_m0_l1"], Some(dir.path()));
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("status="));
    let bundle = dir.path().join("gmm_m0_l1");
    for f in ["trajectory.csv", "metrics.csv", "events.csv", "verdict.toml", "provenance.toml"] {
        assert!(bundle.join(f).is_file(), "missing {f}");
    }
    assert!(bundle.join("plots").join("velocity.svg").is_file());
}

#[test]
fn repeated_simulate_is_byte_identical_outside_provenance() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    assert!(platoon(&["simulate", "idm_pulse"], Some(d1.path())).status.success());
    assert!(platoon(&["simulate", "idm_pulse"], Some(d2.path())).status.success());
    for f in ["trajectory.csv", "metrics.csv", "events.csv", "verdict.toml"] {
        let a = std::fs::read(d1.path().join("idm_pulse").join(f)).unwrap();
        let b = std::fs::read(d2.path().join("idm_pulse").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }
}

#[test]
fn unknown_scenario_fails_validation() {
    let out = platoon(&["simulate", "no_such_scenario"], None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error: "), "stderr: {err}");
    assert_eq!(err.trim_end().lines().count(), 1, "one machine-readable line");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = platoon(&["frobnicate"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_map_condition_fails_validation() {
    let out = platoon(&["stability-map", "xyz"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("xyz"));
}

#[test]
fn stability_map_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = platoon(&["stability-map", "gmm", "--res", "12"], Some(dir.path()));
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let map_dir = dir.path().join("maps").join("gmm");
    assert!(map_dir.join("map.csv").is_file());
    assert!(map_dir.join("map.svg").is_file());
    assert!(stdout(&out).contains("cells:"));
}

#[test]
fn stability_map_accepts_axis_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = platoon(
        &["stability-map", "ovm", "--res", "5", "--axes", "gap=2:12", "--axes", "sensitivity=0:1"],
        Some(dir.path()),
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("maps/ovm/map.csv")).unwrap();
    assert!(csv.contains("# axis=gap,2,12,5"), "csv header: {csv}");
}

#[test]
fn compare_runs_each_scenario_into_its_own_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = platoon(&["compare", "gmm_m0_l1", "cacc_v2v"], Some(dir.path()));
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("compare/gmm_m0_l1/trajectory.csv").is_file());
    assert!(dir.path().join("compare/cacc_v2v/trajectory.csv").is_file());
    let text = stdout(&out);
    assert!(text.contains("peak|e|="), "stdout: {text}");
}

#[test]
fn sweep_writes_one_bundle_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = platoon(
        &["sweep", "gmm_m0_l1", "--param", "model.gmm.sensitivity", "--values", "0.5", "1.0"],
        Some(dir.path()),
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("sweep/gmm_m0_l1__model.gmm.sensitivity=0.5/verdict.toml").is_file());
    assert!(dir.path().join("sweep/gmm_m0_l1__model.gmm.sensitivity=1.0/verdict.toml").is_file());
}

#[test]
fn sweep_rejects_an_impossible_parameter_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = platoon(
        &["sweep", "gmm_m0_l1", "--param", "platoon.n_vehicles.x", "--values", "1"],
        Some(dir.path()),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn scenario_files_load_from_paths_too() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("local.toml");
    std::fs::write(&path, platoon_core::scenario::bundled_scenario_text("gmm_m0_l1").unwrap())
        .unwrap();
    let out = platoon(&["simulate", path.to_str().unwrap()], Some(dir.path()));
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("gmm_m0_l1").join("trajectory.csv").is_file());
}
