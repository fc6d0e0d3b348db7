use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn allpay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_allpay")).args(args).output().expect("binary runs")
}

fn docs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs")
}

fn scenario(name: &str) -> String {
    docs().join("scenarios").join(name).to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn lambda_curve_minimum() {
    let out = allpay(&["bounds", "lambda", "--min", "0.01", "--max", "1", "--steps", "200"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,poa_bound"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 201);
    let (l, b) = rows.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert!((b - 1.8204).abs() < 1e-3 && (l - 0.56).abs() < 0.02, "{l} {b}");
}

#[test]
fn two_player_price_of_anarchy() {
    let out = allpay(&["single-item", "poa", "--v", "0.5", "--n", "2", "--samples", "1e6", "--seed", "7"]);
    assert!(out.status.success());
    let r = json(&out);
    let w = r["result"]["mc_welfare"]["mean"].as_f64().unwrap();
    assert!((w - 0.875).abs() < 0.002, "{w}");
    let poa = r["result"]["welfare"]["price_of_anarchy"].as_f64().unwrap();
    assert!((poa - 8.0 / 7.0).abs() < 1e-6);
    assert_eq!(r["seed"], 7);
    assert_eq!(r["scenario_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn psam_linear_instance() {
    let out = allpay(&["psam", "solve", "--scenario", &scenario("psam_linear_n50.json")]);
    assert!(out.status.success());
    let ratio = json(&out)["result"]["efficiency"]["ratio"].as_f64().unwrap();
    assert!((ratio - 0.7525).abs() < 1e-3, "{ratio}");
}

#[test]
fn every_shipped_scenario_verifies() {
    for entry in std::fs::read_dir(docs().join("scenarios")).unwrap() {
        let path = entry.unwrap().path();
        let out = allpay(&["verify", "--scenario", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["result"]["certificate"]["verdict"], "certified");
    }
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = allpay(&[
            "verify",
            "--scenario",
            &scenario("prize_vector.json"),
            "--samples",
            "20000",
            "--workers",
            "3",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn curves_written_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = allpay(&["single-item", "poa", "--v", "0.3", "--n", "4", "--csv", csv.to_str().unwrap(), "--steps", "9"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 10);
    let row: Vec<f64> = text.lines().nth(5).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 0.5);
    assert!((row[1] - (0.5 * 2f64.ln() + 0.5)).abs() < 1e-12);
}

#[test]
fn refuted_profile_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fp.json");
    std::fs::write(&path, r#"{"mechanism": "first-price", "values": [1.0, 0.5], "bids": [0.2, 0.1]}"#).unwrap();
    let out = allpay(&["verify", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn input_errors_exit_one_with_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"mechanism": "psam", "valuations": [{"multiunit": [0, 1]}, {"multiunit": [0, -1]}], "m": 1}"#)
        .unwrap();
    let out = allpay(&["psam", "solve", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/valuations/1/multiunit"));

    std::fs::write(&path, r#"{"mechanism": "psam", "valuations": [{"multiunit": [0, "one"]}]}"#).unwrap();
    let out = allpay(&["psam", "solve", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/valuations/0/multiunit/1"));

    let out = allpay(&["single-item", "poa", "--v", "0.5", "--samples", "1000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/seed"));

    assert_eq!(allpay(&["single-item", "poa", "--samples", "1.5"]).status.code(), Some(1));
    assert_eq!(allpay(&["nonsense"]).status.code(), Some(1));
}

#[test]
fn schema_properties_match_the_loader() {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(docs().join("scenario.schema.json")).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    for key in schema["properties"].as_object().unwrap().keys() {
        std::fs::write(&path, format!(r#"{{"{key}": {{"wrong": true}}}}"#)).unwrap();
        let out = allpay(&["bounds", "lambda", "--scenario", path.to_str().unwrap()]);
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(1));
        assert!(err.contains(&format!("/{key}")) && !err.contains("unknown field"), "{key}: {err}");
    }
}

#[test]
fn envelope_matches_result_schema() {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(docs().join("result.schema.json")).unwrap()).unwrap();
    let out = allpay(&["bounds", "prop1", "--n", "4", "--target", "0.5", "--starts", "32", "--seed", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    let mut keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    let mut required: Vec<&str> = schema["required"].as_array().unwrap().iter().map(|k| k.as_str().unwrap()).collect();
    keys.sort_unstable();
    required.sort_unstable();
    assert_eq!(keys, required);
    assert!(r["result"]["min"].as_f64().unwrap() >= 0.5f64.sqrt() - 1e-9);
}

#[test]
fn revenue_report() {
    let out = allpay(&["single-item", "revenue", "--v", "0.1", "--q", "0.8,0.2", "--k", "200", "--samples", "1e5", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert!((r["result"]["prize_vector"]["revenue"].as_f64().unwrap() - 0.033).abs() < 1e-12);
    assert_eq!(r["result"]["max_bid"]["holds"], true);
    assert!(r["checks"].as_array().unwrap().len() >= 4);
}
