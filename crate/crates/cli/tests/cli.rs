//! End-to-end tests of the binary: exit codes, schema validation with field
//! paths, byte-identical reports for identical (spec, seed, version), and the
//! CSV round-trip guarantee.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spherebranch"))
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spherebranch_test_{name}_{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_spec(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("problem.json");
    fs::write(&path, text).unwrap();
    path
}

const K3_SPEC: &str = r#"{"dim": 8,
  "L": {"builder": "Tk", "k": 3},
  "C": {"builder": "harmonic"},
  "N": {"builder": "paper_N"}}"#;

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn spectrum_subcommand_succeeds() {
    let dir = temp_dir("spectrum");
    let spec = write_spec(&dir, K3_SPEC);
    let out = run(&[
        "spectrum",
        "--spec",
        spec.to_str().unwrap(),
        "--window",
        "-1:6.5",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let lambdas: Vec<f64> = report["spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["lambda"].as_f64().unwrap())
        .collect();
    assert_eq!(lambdas.len(), 4); // 0 (mult 3), 4, 5, 6
    assert!(lambdas[0].abs() < 1e-9);
}

#[test]
fn invalid_truncation_exits_3() {
    let dir = temp_dir("badk");
    let spec = write_spec(
        &dir,
        r#"{"dim": 8, "L": {"builder": "Tk", "k": 9},
            "C": {"builder": "harmonic"}, "N": {"builder": "paper_N"}}"#,
    );
    let out = run(&["spectrum", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_key_reports_field_path_and_exits_3() {
    let dir = temp_dir("badkey");
    let spec = write_spec(
        &dir,
        r#"{"dim": 8, "L": {"builder": "Tk", "k": 3},
            "C": {"builder": "harmonic"}, "N": {"builder": "paper_N"},
            "extra_key": true}"#,
    );
    let out = run(&["spectrum", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("schema violation"), "{stderr}");
}

#[test]
fn missing_spec_exits_3() {
    let out = run(&["spectrum"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn degree_at_eigenvalue_endpoint_exits_2() {
    let dir = temp_dir("endpoint");
    let spec = write_spec(&dir, K3_SPEC);
    let out = run(&[
        "degree",
        "--spec",
        spec.to_str().unwrap(),
        "--alpha",
        "0",
        "--beta",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("collides"), "{stderr}");
}

#[test]
fn degree_subcommand_reports_value() {
    let dir = temp_dir("degree");
    let spec = write_spec(&dir, K3_SPEC);
    let out = run(&[
        "degree",
        "--spec",
        spec.to_str().unwrap(),
        "--alpha",
        "-0.5",
        "--beta",
        "0.5",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = report["degree"]["value"].as_i64().unwrap();
    assert_ne!(value, 0);
    assert_eq!(value.rem_euclid(4), 2);
    assert_eq!(report["degree"]["method"], "epsilon-perturbation");
}

#[test]
fn reports_are_byte_identical_for_identical_inputs() {
    let dir_a = temp_dir("golden_a");
    let dir_b = temp_dir("golden_b");
    for dir in [&dir_a, &dir_b] {
        let out = run(&[
            "example",
            "--name",
            "k2",
            "--n",
            "8",
            "--seed",
            "42",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let report_a = fs::read(dir_a.join("report.json")).unwrap();
    let report_b = fs::read(dir_b.join("report.json")).unwrap();
    assert_eq!(report_a, report_b, "reports differ between identical runs");
    for entry in fs::read_dir(&dir_a).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "timings.json" {
            continue; // wall-clock data, excluded from the determinism guarantee
        }
        let a = fs::read(dir_a.join(&name)).unwrap();
        let b = fs::read(dir_b.join(&name)).unwrap();
        assert_eq!(a, b, "artifact {name:?} differs");
    }
}

#[test]
fn trace_csv_rows_round_trip() {
    let dir = temp_dir("roundtrip");
    let spec = write_spec(&dir, K3_SPEC);
    let out = run(&[
        "trace",
        "--spec",
        spec.to_str().unwrap(),
        "--anchor-lambda",
        "5",
        "--direction",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.join("trace_branch.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "step");
    assert_eq!(header[1], "s");
    assert_eq!(header[2], "lambda");
    assert_eq!(header.last().unwrap(), &"residual");
    assert_eq!(header.len(), 8 + 4); // step, s, lambda, x_1..x_8, residual
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), header.len());
        let step: usize = cells[0].parse().unwrap();
        assert_eq!(step, i);
        for cell in &cells[1..] {
            // lossless: parsing and re-serializing reproduces the exact text
            let value: f64 = cell.parse().unwrap();
            assert_eq!(&format!("{value:.16e}"), cell);
        }
        rows += 1;
    }
    assert!(rows > 10);
    // verdict on stdout
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["trace"]["verdicts"][0]["verdict"], "Unbounded");
}

#[test]
fn map_subcommand_writes_component_csvs() {
    let dir = temp_dir("map");
    let spec = write_spec(&dir, K3_SPEC);
    let out = run(&[
        "map",
        "--spec",
        spec.to_str().unwrap(),
        "--window",
        "-1:1,-1:4.6",
        "--grid",
        "64",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let components = report["map"]["components"].as_array().unwrap();
    assert_eq!(components.len(), 1);
    assert_eq!(components[0]["kind"], "closed_curve");
    let csv_file = components[0]["csv_file"].as_str().unwrap();
    let csv = fs::read_to_string(dir.join(csv_file)).unwrap();
    assert!(csv.starts_with("s,lambda\n"));
    for line in csv.lines().skip(1) {
        for cell in line.split(',') {
            let value: f64 = cell.parse().unwrap();
            assert_eq!(&format!("{value:.16e}"), cell);
        }
    }
}

#[test]
fn example_rejects_small_truncations() {
    let out = run(&["example", "--name", "k1", "--n", "4"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn log_env_var_enables_info_output() {
    let dir = temp_dir("logenv");
    let spec = write_spec(&dir, K3_SPEC);
    let out = bin()
        .args([
            "spectrum",
            "--spec",
            spec.to_str().unwrap(),
            "--window",
            "-1:4.5",
            "--out",
            dir.to_str().unwrap(),
        ])
        .env("SPHEREBRANCH_LOG", "info")
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("[info]"), "{stderr}");
}

#[test]
fn threads_flag_gives_identical_report() {
    let dir_a = temp_dir("thr_a");
    let dir_b = temp_dir("thr_b");
    let out = run(&[
        "example",
        "--name",
        "k1",
        "--n",
        "8",
        "--out",
        dir_a.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "example",
        "--name",
        "k1",
        "--n",
        "8",
        "--threads",
        "4",
        "--out",
        dir_b.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let a = fs::read(dir_a.join("report.json")).unwrap();
    let b = fs::read(dir_b.join("report.json")).unwrap();
    assert_eq!(a, b);
}
