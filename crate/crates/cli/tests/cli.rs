use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TRIANGLE: &str = r#"{
  "version": "v1",
  "region": {"a": [[1, 0], [0, 1], [-1, -1]], "b": [0, 0, -1], "names": ["x >= 0", "y >= 0", "x + y <= 1"]},
  "observations": {"points": [[0.6, 0.6]]}
}"#;

fn invlearn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invlearn")).args(args).output().unwrap()
}

fn json_out(args: &[&str]) -> Value {
    let out = invlearn(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn triangle_file(dir: &Path) -> String {
    let path = dir.join("triangle.json");
    std::fs::write(&path, TRIANGLE).unwrap();
    path.to_str().unwrap().to_string()
}

fn point(v: &Value) -> Vec<f64> {
    v["point"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn near(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9)
}

#[test]
fn il_and_mgil_on_the_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let file = triangle_file(dir.path());
    let il = json_out(&["il", &file]);
    assert!(near(&point(&il), &[0.0, 0.6]));
    assert!((il["loss"].as_f64().unwrap() - 0.36).abs() < 1e-9);
    assert_eq!(il["active_names"], serde_json::json!(["x >= 0"]));

    let mgil = json_out(&["mgil", &file, "--mode", "exhaustive"]);
    assert!(near(&point(&mgil), &[0.0, 1.0]));
    let steps = mgil["trace"]["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 2);
    assert!((steps[1]["delta"].as_f64().unwrap() - 0.16).abs() < 1e-9);
}

#[test]
fn gil_exports_the_milp() {
    let dir = tempfile::tempdir().unwrap();
    let file = triangle_file(dir.path());
    let lp = dir.path().join("gil.lp");
    let out = dir.path().join("gil.json");
    let status = invlearn(&["gil", &file, "--r", "2", "--export-lp", lp.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let sol: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(near(&point(&sol), &[0.0, 1.0]));
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.starts_with("\\") || text.to_lowercase().contains("minimize"), "{text}");
    assert!(text.to_lowercase().contains("binar"));
}

#[test]
fn diagnose_reports_identifiability() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edge.json");
    std::fs::write(
        &path,
        TRIANGLE.replace("[[0.6, 0.6]]", "[[0.2, 0.8], [0.7, 0.3]]"),
    )
    .unwrap();
    let report = json_out(&["diagnose", path.to_str().unwrap()]);
    assert_eq!(report["findings"], serde_json::json!([]));
    assert!(report["identifiability"].is_object(), "{report}");

    let outside = json_out(&["diagnose", &triangle_file(dir.path())]);
    assert!(outside["note"].is_string());

    let bad = invlearn(&["il", dir.path().join("missing.json").to_str().unwrap()]);
    assert!(!bad.status.success());
}

#[test]
fn bench_writes_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/smoke.toml");
    let out = invlearn(&["bench", "--config", config, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    for col in ["model", "distance", "recovered", "seconds"] {
        assert!(header.split(',').any(|c| c == col), "{header}");
    }
    assert!(csv.lines().count() > 1);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!(!summary.is_null());
}

#[test]
fn diet_plan_and_presets() {
    let presets = invlearn(&["diet", "presets"]);
    assert!(String::from_utf8_lossy(&presets.stdout).contains("dash-w51"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    let out = invlearn(&["diet", "plan", "--steps", "1", "-o", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("sodium_mg"));
    let plan: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let steps = plan["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 2);
    let loss: Vec<f64> = steps.iter().map(|s| s["loss"].as_f64().unwrap()).collect();
    assert!(loss[1] >= loss[0] - 1e-7);

    let unknown = invlearn(&["diet", "plan", "--regimen", "keto"]);
    assert!(!unknown.status.success());
}
