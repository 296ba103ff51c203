//! Black-box tests of the command-line binary: exit codes, stdout
//! contracts, schema-valid JSON reports, snapshot round-trips, and config
//! handling.

mod common;

use common::{load_schema, validate_schema};
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fbrk32"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn assert_no_temp_leftovers(dir: &Path) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        assert!(!name.contains(".tmp"), "temporary file left behind: {name}");
    }
}

#[test]
fn help_succeeds_and_usage_errors_exit_two() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["numax", "--help"]).status.code(), Some(0));

    assert_eq!(run(&["--frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        run(&["numax", "--beta", "0.5", "0.5"]).status.code(),
        Some(2),
        "two weights must be rejected"
    );
    assert_eq!(
        run(&["simulate", "--case", "nope", "--scheme", "rk4", "--dt", "100", "--steps", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "simulate",
            "--case",
            "rest",
            "--scheme",
            "fbrk32:0.5,0.5",
            "--dt",
            "100",
            "--steps",
            "1"
        ])
        .status
        .code(),
        Some(2),
        "a weight triple needs three components"
    );
    assert_eq!(
        run(&["optimize", "--cost", "c3"]).status.code(),
        Some(2),
        "unknown cost name"
    );
    assert_eq!(
        run(&["optimize", "--budget", "10"]).status.code(),
        Some(2),
        "budget below the documented minimum"
    );
}

#[test]
fn numax_prints_the_value_and_writes_schema_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("numax.json");
    let out = run(&[
        "numax",
        "--beta",
        "0.516",
        "0.532",
        "0.331",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let value: f64 = stdout_of(&out)
        .trim()
        .parse()
        .expect("stdout is one number");
    assert!((value - 1.796).abs() <= 3e-3, "nu_max printed {value}");

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    validate_schema(&load_schema("numax.schema.json"), &json).unwrap();
    assert_eq!(json["flag"], "bracketed");
    assert_eq!(json["weights"].as_array().unwrap().len(), 3);
    assert_no_temp_leftovers(dir.path());
}

#[test]
fn numax_accepts_negative_weights() {
    let out = run(&["numax", "--beta", "-0.1", "0.5", "0.2"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
}

#[test]
fn optimize_writes_a_schema_valid_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("opt.json");
    let out = run(&[
        "optimize",
        "--cost",
        "c1",
        "--budget",
        "150",
        "--seed",
        "1",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("weights = "), "stdout: {text}");
    assert!(text.contains("nu_max = "));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    validate_schema(&load_schema("optimize_report.schema.json"), &json).unwrap();
    assert_eq!(json["unstable_everywhere"], false);
}

#[test]
fn spectrum_streams_csv_and_renders_plots() {
    let out = run(&["spectrum", "--beta", "0.516", "0.532", "0.331"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "ktilde_nu,re1,im1,abs1,re2,im2,abs2");
    assert_eq!(lines.len(), 257, "header plus 256 samples");
    assert_eq!(
        lines[1], "0,1,0,1,1,0,1",
        "curve starts at the unit eigenvalue"
    );

    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("spectrum.svg");
    let plot_path = dir.path().join("plot.csv");
    let json_csv = dir.path().join("curve.csv");
    let out = run(&[
        "spectrum",
        "--beta",
        "0.516",
        "0.532",
        "0.331",
        "--samples",
        "128",
        "--out",
        json_csv.to_str().unwrap(),
        "--svg",
        svg_path.to_str().unwrap(),
        "--plot-csv",
        plot_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).is_empty(), "file outputs silence stdout");

    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert_eq!(svg.matches("<circle").count(), 1);
    assert!(svg.contains("unit circle"));

    let plot = std::fs::read_to_string(&plot_path).unwrap();
    let plot_lines: Vec<&str> = plot.lines().collect();
    assert_eq!(plot_lines[0], "x,series,value");
    assert_eq!(plot_lines.len(), 1 + 128 * 4);

    let curve = std::fs::read_to_string(&json_csv).unwrap();
    assert_eq!(curve.lines().count(), 129);
    assert_no_temp_leftovers(dir.path());
}

#[test]
fn simulate_reports_summary_and_round_trips_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("snap.csv");
    let out = run(&[
        "simulate",
        "--case",
        "qlw",
        "--scheme",
        "fbrk32:0.516,0.532,0.331",
        "--dt",
        "200",
        "--steps",
        "50",
        "--nx",
        "32",
        "--ny",
        "32",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let summary: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    validate_schema(&load_schema("simulate_summary.schema.json"), &summary).unwrap();
    assert_eq!(summary["stable"], true);
    assert_eq!(summary["steps"], 50);
    assert_eq!(summary["nx"], 32);

    let (state, grid) = fbrk32::swe::read_csv(std::io::BufReader::new(
        std::fs::File::open(&csv_path).unwrap(),
    ))
    .unwrap();
    assert_eq!((grid.nx, grid.ny), (32, 32));
    assert!(state.all_finite());

    let bin_path = dir.path().join("snap.bin");
    let out = run(&[
        "simulate",
        "--case",
        "qlw",
        "--scheme",
        "fbrk32:0.516,0.532,0.331",
        "--dt",
        "200",
        "--steps",
        "50",
        "--nx",
        "32",
        "--ny",
        "32",
        "--format",
        "bin",
        "--out",
        bin_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let bytes = std::fs::read(&bin_path).unwrap();
    assert_eq!(&bytes[0..4], b"SWEP");
    let (bin_state, bin_grid) = fbrk32::swe::read_binary(bytes.as_slice()).unwrap();
    assert_eq!((bin_grid.nx, bin_grid.ny), (32, 32));
    assert_eq!(bin_state.h, state.h, "both formats capture the same state");
    assert_no_temp_leftovers(dir.path());
}

#[test]
fn simulate_at_rest_stays_exactly_at_rest() {
    let out = run(&[
        "simulate", "--case", "rest", "--scheme", "rk4", "--dt", "300", "--steps", "20", "--nx",
        "16", "--ny", "16",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(summary["max_abs_u"], 0.0);
    assert_eq!(summary["max_h_anomaly"], 0.0);
    assert_eq!(summary["max_abs_vorticity"], 0.0);
}

#[test]
fn simulate_blowup_exits_one_and_writes_no_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("never.csv");
    let out = run(&[
        "simulate",
        "--case",
        "qlw",
        "--scheme",
        "rk4",
        "--dt",
        "600",
        "--steps",
        "200",
        "--nx",
        "32",
        "--ny",
        "32",
        "--out",
        snap.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let summary: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(summary["stable"], false);
    assert!(stderr_of(&out).contains("blew up"));
    assert!(!snap.exists(), "unstable runs must not leave a snapshot");
}

#[test]
fn cfl_without_reference_writes_schema_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("cfl.json");
    let csv_path = dir.path().join("cfl.csv");
    let out = run(&[
        "cfl",
        "--case",
        "qlw",
        "--scheme",
        "fbrk32:0.516,0.532,0.331",
        "--ref-scheme",
        "none",
        "--duration",
        "60000",
        "--dt-lo",
        "100",
        "--dt-hi",
        "2000",
        "--rel-tol",
        "0.05",
        "--out",
        json_path.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("dt_max = "), "stdout: {text}");
    assert!(!text.contains("ratio"), "no reference requested");

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    validate_schema(&load_schema("cfl_report.schema.json"), &json).unwrap();
    assert!(json["reference"].is_null());
    assert!(json["ratio"].is_null());
    let dt_max = json["scheme"]["dt_max"].as_f64().unwrap();
    assert!(
        (300.0..700.0).contains(&dt_max),
        "grid-scale step limit out of range: {dt_max}"
    );

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 2, "header plus one row");
    assert_no_temp_leftovers(dir.path());
}

#[test]
fn converge_writes_schema_valid_json_and_long_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("conv.json");
    let csv_path = dir.path().join("conv.csv");
    let out = run(&[
        "converge",
        "--case",
        "qlw",
        "--scheme",
        "fbrk32:0.516,0.532,0.331",
        "--steps-list",
        "200,300",
        "--t-final",
        "8000",
        "--ref-steps",
        "3200",
        "--self-check",
        "--out",
        json_path.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("slope_h = "));
    assert!(text.contains("one_step_slope = "));
    assert!(text.contains("reference_self_check = "));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    validate_schema(&load_schema("convergence_report.schema.json"), &json).unwrap();
    let slope_h = json["slope_h"].as_f64().unwrap();
    assert!((1.7..2.3).contains(&slope_h), "slope_h = {slope_h}");
    assert!(json["reference_self_check"].as_f64().unwrap() > 0.0);
    let one_step = json["one_step_slope"].as_f64().unwrap();
    assert!(
        (2.8..3.2).contains(&one_step),
        "one_step_slope = {one_step}"
    );

    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,series,value");
    assert_eq!(lines.len(), 1 + 2 * 2, "one h and one u row per step size");
    assert_no_temp_leftovers(dir.path());
}

#[test]
fn config_file_supplies_defaults_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.json");
    std::fs::write(
        &config_path,
        r#"{
  "case": "qlw",
  "scheme": "fbrk32:0.516,0.532,0.331",
  "dt": 200.0,
  "steps": 5,
  "grid": { "nx": 16, "ny": 16 },
  "physics": { "momentum_advection": false }
}"#,
    )
    .unwrap();

    let out = run(&["simulate", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let summary: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(summary["steps"], 5);
    assert_eq!(summary["nx"], 16);

    let out = run(&[
        "simulate",
        "--config",
        config_path.to_str().unwrap(),
        "--steps",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(summary["steps"], 3, "flags override the config file");

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{ "case": "qlw", "dt": 200.0, "stepz": 5 }"#).unwrap();
    let out = run(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("malformed config"));

    let bad_nested = dir.path().join("bad_nested.json");
    std::fs::write(
        &bad_nested,
        r#"{ "case": "qlw", "scheme": "rk4", "dt": 200.0, "steps": 1, "physics": { "gravity": 9.8 } }"#,
    )
    .unwrap();
    let out = run(&["simulate", "--config", bad_nested.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
