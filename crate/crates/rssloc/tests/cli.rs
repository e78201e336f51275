use std::path::Path;
use std::process::Command;

use rssloc::bench::run_experiment;
use rssloc::cli::{self, cmd_crlb, EstimateOutput};
use rssloc::io::{parse_json, EstimateConfig, ExperimentFile, MeasurementFile};
use rssloc::report::{report_to_string, Format};
use rssloc_core::inference::CurveSweep;
use rssloc_core::model::noise_free_raw_db;
use rssloc_core::scenarios::{self, ScenarioId, SignalParams, FIXED_2D_SENSORS, FIXED_2D_SOURCE};
use rssloc_core::{localizability, LocalizabilityReport};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["rssloc".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::main_with_args(&argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn error_kind(stderr: &str) -> String {
    let v: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    v["error"]["kind"].as_str().unwrap().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn noise_free_file(with_sigma: bool) -> String {
    let sensors: Vec<Vec<f64>> = FIXED_2D_SENSORS
        .iter()
        .map(|p| p.as_slice().to_vec())
        .collect();
    let raw: Vec<f64> = FIXED_2D_SENSORS
        .iter()
        .map(|p| noise_free_raw_db(p.distance(&FIXED_2D_SOURCE), 1.0, 2.0))
        .collect();
    let mut v = serde_json::json!({"sensors": sensors, "raw_db": raw});
    if with_sigma {
        v["sigma_db"] = serde_json::json!(0.0);
    }
    v.to_string()
}

fn estimate(dir: &Path, body: &str) -> EstimateOutput {
    let path = write(dir, "m.json", body);
    let (code, out, err) = run(&["estimate", "--measurements", &path]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let file: MeasurementFile = parse_json(body).unwrap();
    let lib = cli::cmd_estimate(file, &EstimateConfig::default()).unwrap();
    let p: Vec<f64> = serde_json::from_value(v["p_hat"].clone()).unwrap();
    assert_eq!(p, lib.p_hat);
    lib
}

#[test]
fn estimate_noise_free_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let known = estimate(dir.path(), &noise_free_file(true));
    assert_eq!(known.variance, "known");
    let unknown = estimate(dir.path(), &noise_free_file(false));
    assert_eq!(unknown.variance, "unknown");
    for r in [&known, &unknown] {
        assert!((r.p_hat[0] - 70.0).abs() < 1e-9 && (r.p_hat[1] - 30.0).abs() < 1e-9);
    }
    assert!((known.p_hat[0] - unknown.p_hat[0]).abs() < 1e-9);
}

#[test]
fn estimate_schema_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "bad.json",
        r#"{"sensors": [[0, "x"]], "y": [1]}"#,
    );
    let (code, _, err) = run(&["estimate", "--measurements", &path]);
    assert_eq!(code, 2);
    assert_eq!(error_kind(&err), "schema");

    let path = write(
        dir.path(),
        "short.json",
        r#"{"sensors": [[0, 1, 2, 3]], "y": [1]}"#,
    );
    let (code, _, err) = run(&["estimate", "--measurements", &path]);
    assert_eq!((code, error_kind(&err).as_str()), (2, "schema"));
}

#[test]
fn estimate_numeric_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "line.json",
        r#"{"sensors": [[0,0],[1,0],[2,0],[3,0]], "y": [1,1,1,1], "sigma_db": 1}"#,
    );
    let (code, _, err) = run(&["estimate", "--measurements", &path]);
    assert_eq!(code, 1);
    assert_eq!(error_kind(&err), "numeric");
}

fn experiment_file(dir: &Path, scenario: &str) -> String {
    write(
        dir,
        "exp.json",
        &format!(r#"{{"scenario": "{scenario}", "sweep": {{"rounds": [3, 30]}}, "trials": 50}}"#),
    )
}

#[test]
fn experiment_matches_library_and_formats_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = experiment_file(dir.path(), "2d-fixed");
    let base = [
        "experiment",
        "--config",
        &cfg_path,
        "--seed",
        "42",
        "--estimators",
        "ls,ls-gn,ls-unknown-gn",
    ];
    let (code, csv_text, err) = run(&[&base[..], &["--format", "csv"]].concat());
    assert_eq!(code, 0, "{err}");
    let (code, json_text, _) = run(&[&base[..], &["--format", "json"]].concat());
    assert_eq!(code, 0);

    let file: ExperimentFile = parse_json(&std::fs::read_to_string(&cfg_path).unwrap()).unwrap();
    let mut cfg = file.into_config(Some(42)).unwrap();
    cfg.estimators = vec![
        "ls".parse().unwrap(),
        "ls-gn".parse().unwrap(),
        "ls-unknown-gn".parse().unwrap(),
    ];
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(csv_text, report_to_string(&report, Format::Csv));
    assert_eq!(json_text, report_to_string(&report, Format::Json));

    let json: rssloc::TrialReport = serde_json::from_str(&json_text).unwrap();
    let mut rd = csv::Reader::from_reader(csv_text.as_bytes());
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), json.rows.len());
    for (rec, row) in rows.iter().zip(&json.rows) {
        assert_eq!(&rec[0], row.estimator);
        assert_eq!(rec[2].parse::<f64>().unwrap(), row.sweep_value);
        assert_eq!(rec[6].parse::<f64>().unwrap(), row.bias_m.unwrap());
        assert_eq!(rec[7].parse::<f64>().unwrap(), row.rmse_m.unwrap());
        assert_eq!(rec[8].parse::<f64>().unwrap(), row.rcrlb_m.unwrap());
    }
}

#[test]
fn experiment_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = experiment_file(dir.path(), "3d-fixed");
    let out = dir.path().join("r.csv");
    let args = [
        "experiment",
        "--config",
        &cfg_path,
        "--seed",
        "1",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ];
    let (code, stdout, _) = run(&args);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let first = std::fs::read_to_string(&out).unwrap();
    assert!(first.starts_with("estimator,sweep_param,sweep_value,n,"));
    run(&args);
    assert_eq!(first, std::fs::read_to_string(&out).unwrap());
}

#[test]
fn experiment_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = experiment_file(dir.path(), "5d-fixed");
    let (code, _, err) = run(&["experiment", "--config", &cfg_path, "--seed", "1"]);
    assert_eq!(code, 2);
    assert_eq!(error_kind(&err), "invalid-input");

    let cfg_path = experiment_file(dir.path(), "2d-fixed");
    let (code, _, _) = run(&["experiment", "--config", &cfg_path]);
    assert_eq!(code, 2, "missing seed");
    let (code, _, _) = run(&[
        "experiment",
        "--config",
        &cfg_path,
        "--seed",
        "1",
        "--estimators",
        "ls,best",
    ]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&[
        "experiment",
        "--config",
        "/nonexistent/x.json",
        "--seed",
        "1",
    ]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn check_geometry_and_crlb_are_library_calls() {
    let (code, out, _) = run(&["check-geometry", "--scenario", "2d-fixed"]);
    assert_eq!(code, 0);
    let report: LocalizabilityReport = serde_json::from_str(&out).unwrap();
    assert_eq!(report, localizability(&FIXED_2D_SENSORS, true).unwrap());

    let (code, out, _) = run(&[
        "crlb",
        "--scenario",
        "2d-fixed",
        "--sweep-rounds",
        "3,10,400",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    let sc = scenarios::build(ScenarioId::TwoDFixed, &SignalParams::default(), None).unwrap();
    let rows = cmd_crlb(&sc, Some(CurveSweep::Rounds(vec![3, 10, 400]))).unwrap();
    let mut rd = csv::Reader::from_reader(out.as_bytes());
    let got: Vec<f64> = rd
        .records()
        .map(|r| r.unwrap()[2].parse().unwrap())
        .collect();
    assert_eq!(got, rows.iter().map(|r| r.rcrlb_m).collect::<Vec<_>>());

    let (code, _, err) = run(&["crlb", "--scenario", "2d-random"]);
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = run(&["crlb", "--scenario", "2d-fixed", "--sigma", "0"]);
    assert_eq!(code, 1);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_rssloc");
    let ok = Command::new(bin)
        .args(["check-geometry", "--scenario", "3d-fixed"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin)
        .args(["check-geometry", "--scenario", "nope"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let body: serde_json::Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(body["error"]["exit_code"], 2);
}
