//! End-to-end runs of the command line binary.

use lgga::io::{read_signal_csv, write_matrix_csv, write_signal_csv};
use lgga::model::{make_gaussian_matrix, sample_sparse_signal};
use lgga::rng::RngSpec;
use std::path::Path;
use std::process::{Command, Output};

fn lgga_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lgga"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary should launch")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

/// Writes a solvable planted instance and returns the true signal.
fn plant_instance(dir: &Path, rows: usize, cols: usize, k: usize) -> ndarray::Array1<f64> {
    let spec = RngSpec::new(0xc11);
    let matrix = make_gaussian_matrix(rows, cols, true, &spec.derive(0)).unwrap();
    let truth = sample_sparse_signal(cols, k, 1.0, &spec.derive(1)).unwrap();
    let y = matrix.apply(&truth.dense().view()).unwrap();
    write_matrix_csv(&dir.join("matrix.csv"), &matrix.entries().view()).unwrap();
    write_signal_csv(&dir.join("y.csv"), &y.view()).unwrap();
    truth.dense()
}

#[test]
fn decode_round_trips_a_planted_signal() {
    let dir = tempfile::tempdir().unwrap();
    let truth = plant_instance(dir.path(), 16, 32, 2);
    let output = run(lgga_bin()
        .arg("decode")
        .args([
            "--matrix".as_ref(),
            dir.path().join("matrix.csv").as_os_str(),
        ])
        .args([
            "--measurements".as_ref(),
            dir.path().join("y.csv").as_os_str(),
        ])
        .args(["--out".as_ref(), dir.path().join("x.csv").as_os_str()])
        .args([
            "--report".as_ref(),
            dir.path().join("report.json").as_os_str(),
        ])
        .arg("--trace"));
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(stdout_of(&output).contains("rounds"));

    let estimate = read_signal_csv(&dir.path().join("x.csv")).unwrap();
    let err = (&estimate - &truth).mapv(f64::abs).sum() / truth.mapv(f64::abs).sum();
    assert!(err < 1e-4, "relative error {err}");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert!(report.get("thresholds").is_some());
    assert!(
        report["trace"]["rounds"].as_array().is_some(),
        "trace rounds should be recorded"
    );
}

#[test]
fn adaptive_decode_reports_its_weight_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    plant_instance(dir.path(), 16, 32, 2);
    let output = run(lgga_bin()
        .arg("decode")
        .args([
            "--matrix".as_ref(),
            dir.path().join("matrix.csv").as_os_str(),
        ])
        .args([
            "--measurements".as_ref(),
            dir.path().join("y.csv").as_os_str(),
        ])
        .args(["--out".as_ref(), dir.path().join("x.csv").as_os_str()])
        .args([
            "--report".as_ref(),
            dir.path().join("report.json").as_os_str(),
        ])
        .args(["--algorithm", "algga"]));
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    assert!(stdout_of(&output).contains("adaptive second-block weight"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let states = report["states"]
        .as_array()
        .expect("adaptive states in the report");
    assert!(!states.is_empty());
    assert!(states[0].get("block2_weight").is_some());
}

#[test]
fn lga_rejects_block_weight_flags() {
    let dir = tempfile::tempdir().unwrap();
    plant_instance(dir.path(), 8, 16, 1);
    let output = run(lgga_bin()
        .arg("decode")
        .args([
            "--matrix".as_ref(),
            dir.path().join("matrix.csv").as_os_str(),
        ])
        .args([
            "--measurements".as_ref(),
            dir.path().join("y.csv").as_os_str(),
        ])
        .args(["--out".as_ref(), dir.path().join("x.csv").as_os_str()])
        .args(["--lambda", "1.7"]));
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("lgga"));
}

#[test]
fn reproduce_writes_the_catalog_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(lgga_bin()
        .arg("reproduce")
        .args(["--figure", "2"])
        .args(["--trials", "2"])
        .args(["--step", "16"])
        .args(["--out".as_ref(), dir.path().as_os_str()]));
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    for name in ["fig2_lga_128x256.csv", "fig2_lga_128x384.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("figure,curve_label,k,trials,successes,rate")
        );
        assert!(lines.next().unwrap().starts_with("2,"));
    }
}

#[test]
fn sweep_runs_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
        label = "demo"
        trials = 4
        seed = 3
        axis = [1, 2]

        [matrix]
        rows = 8
        kind = "gaussian"
        cols = 16
        normalize = true

        [signal]
        block_sparsity = ["axis"]

        [decoder]
        algorithm = "lga"
    "#;
    std::fs::write(dir.path().join("demo.toml"), config).unwrap();
    let output = run(lgga_bin()
        .arg("sweep")
        .args([
            "--config".as_ref(),
            dir.path().join("demo.toml").as_os_str(),
        ])
        .args(["--out".as_ref(), dir.path().as_os_str()]));
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let text = std::fs::read_to_string(dir.path().join("demo.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "curve_label,k,trials,successes,rate,mean_relative_error,mean_runtime_seconds"
    );
    assert_eq!(lines.len(), 3, "header plus one row per axis point");
    assert!(lines[1].starts_with("demo,1,4,"));
}

#[test]
fn selftest_reports_every_check() {
    let output = run(lgga_bin().arg("selftest"));
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = stdout_of(&output);
    assert!(stdout.contains("PASS binary_entropy"));
    assert!(stdout.contains("all 6 checks passed"));
    assert!(!stdout.contains("FAIL"));
}
