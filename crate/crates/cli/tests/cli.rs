use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sl2cont(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sl2cont")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn empty_lambda_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"command": "norm-sweep", "lambdas": []}"#).unwrap();
    let out = dir.path().join("out");
    let o = sl2cont(&["norm-sweep", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(report["kind"], "config");
    assert!(out.join("failures.json").exists());
}

#[test]
fn mismatched_command_and_bad_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"command": "dyadic"}"#).unwrap();
    assert_eq!(sl2cont(&["geometry", "--config", path(&cfg)]).status.code(), Some(2));
    fs::write(&cfg, "{ not json").unwrap();
    assert_eq!(sl2cont(&["geometry", "--config", path(&cfg)]).status.code(), Some(2));
    assert_eq!(sl2cont(&["geometry", "--config", path(&dir.path().join("missing.json"))]).status.code(), Some(2));
}

#[test]
fn propagate_writes_table_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let o = sl2cont(&["propagate", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("propagate.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "T,partial_sum,bound,ok");
    assert_eq!(lines.iter().filter(|l| l.ends_with(",true")).count(), 4);
    assert!(lines.iter().any(|l| l.starts_with("# config_hash=")));
}

#[test]
fn spectrum_file_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.json");
    fs::write(&spec, r#"[{"lambda": 3, "c_re": 0.5, "c_im": 0}, {"lambda": 40, "c_re": 0.01, "c_im": 0.01}]"#).unwrap();
    let cfg = dir.path().join("c.json");
    let body = serde_json::json!({"command": "propagate", "spectrum": path(&spec), "t_grid": [5.0, 50.0]});
    fs::write(&cfg, body.to_string()).unwrap();
    let o = sl2cont(&["propagate", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("propagate.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);

    fs::write(&spec, r#"[{"lambda": -3, "c_re": 0.5, "c_im": 0}]"#).unwrap();
    let o = sl2cont(&["propagate", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = sl2cont(&["cusp-scan", "--seed", "7", "--jobs", "2", "--out", path(d.path())]);
        assert_eq!(o.status.code(), Some(0));
    }
    let x = fs::read(a.path().join("cusp_scan.csv")).unwrap();
    let y = fs::read(b.path().join("cusp_scan.csv")).unwrap();
    assert_eq!(x, y);

    let c = tempfile::tempdir().unwrap();
    sl2cont(&["cusp-scan", "--seed", "8", "--out", path(c.path())]);
    assert_ne!(x, fs::read(c.path().join("cusp_scan.csv")).unwrap());
}

#[test]
fn geometry_passes_and_records_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"command": "geometry", "samples": 200, "tolerances": {"relative_tol": 1e-10}}"#).unwrap();
    let o = sl2cont(&["geometry", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("geometry.csv")).unwrap();
    assert!(text.starts_with("set,index,a_re,a_im,b_re,b_im,in_qplus,recomposition_error\n"));
    assert!(text.contains("# tolerance.relative_tol=0.0000000001"));
    assert_eq!(text.lines().filter(|l| l.starts_with("membership")).count(), 200);
}

#[test]
fn strict_turns_warnings_into_failures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    // Loose tolerances keep the assertions green; only flagged rows can fail a strict run.
    let body = r#"{"command": "norm-sweep", "lambdas": [{"im": 0}], "eps_grid": {"start": 0.1, "stop": 0.001, "points": 4},
        "tolerances": {"band_max": 100, "slope_tol": 1}}"#;
    fs::write(&cfg, body).unwrap();
    let o = sl2cont(&["norm-sweep", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let strict = sl2cont(&["norm-sweep", "--strict", "--config", path(&cfg), "--out", path(dir.path())]);
    let warned = !String::from_utf8_lossy(&o.stderr).trim().is_empty();
    assert_eq!(strict.status.code(), Some(if warned { 1 } else { 0 }));
}
