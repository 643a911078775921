//! Black-box behavior of the `krf` binary: exit codes, config precedence,
//! override plumbing, and output file contracts.

use std::path::Path;
use std::process::{Command, Output};

fn krf(dir: &Path, subcommand: &str, sets: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_krf"));
    cmd.arg(subcommand).arg("--output").arg(dir);
    for s in sets {
        cmd.arg("--set").arg(s);
    }
    cmd.output().expect("binary runs")
}

fn read_json(dir: &Path, name: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join(name)).expect("report exists");
    serde_json::from_str(&text).expect("report parses")
}

#[test]
fn identities_default_small_run_passes() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = krf(dir.path(), "identities", &["count=50", "positivity_samples=500"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report = read_json(dir.path(), "identities_report.json");
    assert_eq!(report["pass"], true);
    assert_eq!(report["convention_version"], krf_core::CONVENTION_VERSION);
    let suites = report["suites"].as_array().expect("suite list");
    assert_eq!(suites.len(), 15);
    assert!(suites.iter().all(|s| s["pass"] == true));
}

#[test]
fn impossible_tolerance_fails_with_report() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = krf(
        dir.path(),
        "identities",
        &["count=50", "positivity_samples=100", "tolerances.cancellation=1e-16"],
    );
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let report = read_json(dir.path(), "identities_report.json");
    assert_eq!(report["pass"], false);
    let cancellation = report["suites"]
        .as_array()
        .expect("suite list")
        .iter()
        .find(|s| s["suite"] == "cancellation")
        .expect("cancellation listed");
    assert_eq!(cancellation["pass"], false);
    assert_eq!(cancellation["tolerance"], 1e-16);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = krf(dir.path(), "ode", &["no_such_key=1"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no_such_key"), "stderr: {stderr}");
}

#[test]
fn unknown_suite_tolerance_is_rejected() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = krf(dir.path(), "identities", &["tolerances.no_such_suite=1e-9"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn malformed_config_file_is_rejected() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{not json").expect("write fixture");
    let out = Command::new(env!("CARGO_BIN_EXE_krf"))
        .arg("identities")
        .arg("--config")
        .arg(&path)
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn invalid_domain_is_rejected() {
    let dir = tempfile::tempdir().expect("tempdir");
    for bad in ["dt=-0.5", "grid_n=7", "count=0", "dt_factor=0.3"] {
        let out = krf(dir.path(), "ode", &[bad]);
        assert_eq!(out.status.code(), Some(2), "override {bad}: {out:?}");
    }
}

#[test]
fn set_flag_overrides_config_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"seed": 3, "count": 40, "positivity_samples": 100}"#)
        .expect("write fixture");
    let out = Command::new(env!("CARGO_BIN_EXE_krf"))
        .arg("identities")
        .arg("--config")
        .arg(&path)
        .arg("--output")
        .arg(dir.path())
        .arg("--set")
        .arg("seed=9")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report = read_json(dir.path(), "identities_report.json");
    assert_eq!(report["config"]["seed"], 9, "flag beats file");
    assert_eq!(report["config"]["count"], 40, "file beats default");
}

#[test]
fn out_of_cone_initial_is_flagged_not_counted() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = krf(
        dir.path(),
        "ode",
        &[
            r#"initial={"r":-4,"s":[0,0,0],"m":[[-1,0,0],[0,-1,0],[0,0,0]]}"#,
            "horizon=0.1",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report = read_json(dir.path(), "ode_summary.json");
    assert_eq!(report["hypothesis_unmet"], serde_json::json!([0]));
    assert_eq!(report["violations_two_sum"], 0);
    assert_eq!(report["violations_det"], 0);
    assert_eq!(report["worst_min"], serde_json::Value::Null);
}

#[test]
fn ode_csv_matches_contract() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = krf(dir.path(), "ode", &["count=20", "horizon=0.1"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("ode_runs.csv")).expect("csv exists");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("run_id,t_min_two_sum,min_two_sum,t_min_det,min_det,blew_up,t_blowup")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.split(',').count(), 7, "row {i}: {row}");
        assert!(row.starts_with(&format!("{i},")), "rows sorted by run id");
    }
    assert!(!csv.contains('\r'), "LF line endings only");
}

#[test]
fn lattice_degeneration_reports_failing_step() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = krf(
        dir.path(),
        "lattice",
        &["potential=cos_sum", "epsilon=5", "grid_n=16", "steps=10"],
    );
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let report = read_json(dir.path(), "lattice_report.json");
    assert_eq!(report["outcome"], "metric_degenerate");
    assert_eq!(report["failing_step"], 0);
    let csv = std::fs::read_to_string(dir.path().join("lattice_trace.csv")).expect("csv exists");
    assert_eq!(csv.lines().count(), 1, "header only, no clean rows");
}

#[test]
fn snapshots_follow_the_documented_layout() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = krf(
        dir.path(),
        "lattice",
        &["grid_n=8", "steps=4", "snapshot_every=2"],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let points = 8usize.pow(4);
    for step in [0, 2, 4] {
        let header = read_json(dir.path(), &format!("snapshot_{step:06}.json"));
        assert_eq!(header["format_version"], 1);
        assert_eq!(header["grid_n"], 8);
        assert_eq!(header["endianness"], "little");
        let fields = header["fields"].as_array().expect("field list");
        let names: Vec<&str> = fields.iter().map(|f| f["name"].as_str().unwrap()).collect();
        assert_eq!(names, ["phi", "r", "s_norm", "det_indicator", "two_sum"]);
        let bin = std::fs::read(dir.path().join(format!("snapshot_{step:06}.bin")))
            .expect("binary payload exists");
        assert_eq!(bin.len(), 5 * points * 8, "five little-endian f64 fields");
    }
    let report = read_json(dir.path(), "lattice_report.json");
    assert_eq!(report["snapshots"].as_array().map(|s| s.len()), Some(3));
}

#[test]
fn zero_potential_series_are_identically_zero() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = krf(dir.path(), "lattice", &["potential=zero", "grid_n=8", "steps=10"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("lattice_trace.csv")).expect("csv exists");
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        // sup_phi, sup_r, min_det_indicator, min_two_sum are exactly zero; the
        // metric eigenvalue sits at the flat value 1.
        assert_eq!(&cols[2..6], &["0", "0", "0", "0"], "line: {line}");
        assert_eq!(cols[6], "1", "line: {line}");
    }
}
