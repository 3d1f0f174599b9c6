// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn qtb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtb"))
        .args(args)
        .output()
        .expect("qtb runs")
}

fn preset_with(name: &str, from: &str, to: &str, dir: &Path) -> String {
    let text = String::from_utf8(qtb(&["preset", name]).stdout).unwrap();
    assert!(text.contains(from), "{from}");
    let path = dir.join("edited.toml");
    std::fs::write(&path, text.replace(from, to)).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_prints_json_report() {
    let out = qtb(&["run", "nominal"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["name"], "nominal");
    assert!(
        report["dynamics"]["crossings"][0]["time_s"]
            .as_f64()
            .unwrap()
            > 0.0
    );
}

#[test]
fn run_csv_has_trajectory_columns() {
    let out = qtb(&["run", "nominal", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "t_s,s_rescaled,theta_rad,deviation_rad"
    );
    assert_eq!(text.lines().count(), 242);
}

#[test]
fn run_writes_files_to_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = qtb(&["run", "nominal", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(dir.path().join("report.json").is_file());
    assert!(dir.path().join("trajectory.csv").is_file());
}

#[test]
fn sweep_emits_one_row_per_value() {
    let out = qtb(&[
        "sweep",
        "nominal",
        "--axis",
        "n_gas",
        "--values",
        "1e8,1e9 m^-3,1e10",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("n_gas_m-3,"));
}

#[test]
fn sweep_json() {
    let out = qtb(&[
        "sweep", "nominal", "--axis", "duration", "--values", "1 s,2 s", "--format", "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["points"].as_array().unwrap().len(), 2);
}

#[test]
fn check_paper_succeeds_and_flags() {
    let out = qtb(&["check-paper"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[FLAG] deviation_at_2_5s"));
    assert!(text.contains("[PASS] tau_d_300K"));

    let json = qtb(&["check-paper", "--format", "json"]);
    let claims: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert!(claims.as_array().unwrap().len() >= 5);
}

#[test]
fn plot_data_writes_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = qtb(&[
        "plot-data",
        "sounding_rocket",
        "--out",
        dir.path().to_str().unwrap(),
        "--svg",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "manifest.json",
        "classical.csv",
        "quantum.csv",
        "figure.svg",
        "report.json",
    ] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["vertical_markers"].as_array().unwrap().len(), 4);
}

#[test]
fn exit_codes_distinguish_error_classes() {
    let dir = tempfile::tempdir().unwrap();

    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "").unwrap();
    let config = qtb(&["run", empty.to_str().unwrap()]);
    assert_eq!(config.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&config.stderr).contains("rod.sphere_radius"));

    assert_eq!(qtb(&["run", "no_such_preset"]).status.code(), Some(3));
    assert_eq!(
        qtb(&["sweep", "nominal", "--axis", "colour", "--values", "1"])
            .status
            .code(),
        Some(3)
    );

    let unreachable = preset_with(
        "nominal",
        "transfer_time = \"2.5 us\"",
        "transfer_time = \"1 ms\"",
        dir.path(),
    );
    let domain = qtb(&["run", &unreachable]);
    assert_eq!(domain.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&domain.stderr).contains("protocol stage"));

    let singular = preset_with(
        "nominal",
        "dielectric = { re = 5.7, im = 2.85e-4 }",
        "dielectric = { re = -2.0, im = 0.0 }",
        dir.path(),
    );
    assert_eq!(qtb(&["run", &singular]).status.code(), Some(5));

    assert_eq!(qtb(&["run"]).status.code(), Some(2));
}
