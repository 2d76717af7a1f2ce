use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn wignerkin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wignerkin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(parse_field).collect())
        .collect();
    (header, rows)
}

fn parse_field(f: &str) -> f64 {
    match f {
        "true" => 1.0,
        "false" => 0.0,
        _ => f.parse().unwrap(),
    }
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn wigner_default_cat_has_negative_cells() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.csv");
    let o = wignerkin(&["wigner", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["x", "p", "w"]);
    assert_eq!(rows.len(), 1024 * 1024);
    let min = rows.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min);
    assert!(min < -0.05, "min {min}");
    let side = read_json(&dir.path().join("w.json"));
    assert_eq!(side["convention_tag"], "paper");
    assert!((side["integral"].as_f64().unwrap() - 1.1353355).abs() < 1e-6);
    let bytes = std::fs::read(&out).unwrap();
    assert!(!bytes.contains(&b'\r'));
}

#[test]
fn wigner_vacuum_cat_is_nonnegative() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.csv");
    let o = wignerkin(&[
        "wigner",
        "--x0",
        "0",
        "--grid-n",
        "101",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let (_, rows) = read_csv(&out);
    assert!(rows.iter().all(|r| r[2] >= 0.0));
}

#[test]
fn wigner_json_format() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.json");
    let o = wignerkin(&[
        "wigner",
        "--state",
        "coherent",
        "--x0",
        "1",
        "--grid-n",
        "41",
        "--format",
        "json",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let doc = read_json(&out);
    assert_eq!(doc["values"].as_array().unwrap().len(), 41 * 41);
    assert_eq!(doc["state"]["kind"], "coherent");
}

#[test]
fn inverted_bounds_fail_without_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.csv");
    let o = wignerkin(&[
        "wigner",
        "--x-min",
        "3",
        "--x-max",
        "-3",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert!(!o.stderr.is_empty());
}

#[test]
fn csv_path_with_json_extension_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.json");
    let o = wignerkin(&[
        "wigner",
        "--grid-n",
        "11",
        "--format",
        "csv",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn tiny_window_is_a_numerical_guard() {
    let o = wignerkin(&[
        "homodyne",
        "--grid-window",
        "2",
        "--grid-n",
        "101",
        "--samples",
        "100",
        "--bootstrap",
        "10",
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn unwritable_output_is_an_io_error() {
    let o = wignerkin(&[
        "wigner",
        "--grid-n",
        "11",
        "--out",
        "/nonexistent-dir/w.csv",
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn pi2_crossing_and_columns() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("pi2.csv");
    let o = wignerkin(&[
        "pi2",
        "--grid-n",
        "512",
        "--t-max",
        "1",
        "--t-points",
        "11",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["t", "pi2_numeric", "pi2_analytic"]);
    assert_eq!(rows.len(), 11);
    for r in &rows {
        assert!((r[1] - r[2]).abs() < 1e-6, "{r:?}");
    }
    assert!(rows[0][1] < 0.0 && rows[10][1] > 0.0);
    let side = read_json(&dir.path().join("pi2.json"));
    let target = 1.0 / 3f64.sqrt();
    assert!((side["negativity_window"].as_f64().unwrap() - target).abs() < 1e-12);
    assert!((side["numeric_zero_crossing"].as_f64().unwrap() - target).abs() < 1e-4);
}

#[test]
fn pi2_small_displacement_has_no_window() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("pi2.csv");
    let o = wignerkin(&[
        "pi2",
        "--x0",
        "0.5",
        "--grid-n",
        "256",
        "--t-points",
        "5",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let side = read_json(&dir.path().join("pi2.json"));
    assert!(side["negativity_window"].is_null());
    assert!(side["numeric_zero_crossing"].is_null());
    let (_, rows) = read_csv(&out);
    assert!(rows.iter().all(|r| r[1] > 0.0));
}

#[test]
fn pi2_single_time_and_coherent_columns() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("pi2.csv");
    let o = wignerkin(&[
        "pi2",
        "--state",
        "coherent",
        "--grid-n",
        "128",
        "--t-min",
        "0.5",
        "--t-points",
        "1",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["t", "pi2_numeric"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.5);
}

#[test]
fn absdev_flags_the_cat_before_the_window_closes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("a.csv");
    let o = wignerkin(&["absdev", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["t", "absdev", "d1", "d2", "violation_flag"]);
    assert_eq!(rows.len(), 21);
    assert!((rows[0][3] + 0.152710).abs() < 1e-4);
    let raw = std::fs::read_to_string(&out).unwrap();
    assert!(raw.lines().nth(1).unwrap().ends_with(",true"));
    for r in &rows {
        let expected = if r[0] < 1.0 / 3f64.sqrt() { 1.0 } else { 0.0 };
        assert_eq!(r[4], expected, "t = {}", r[0]);
    }
    let side = read_json(&dir.path().join("a.json"));
    assert!(!side["classicality"]["violations"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn absdev_coherent_has_no_flags() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("a.csv");
    let o = wignerkin(&[
        "absdev",
        "--state",
        "coherent",
        "--x0",
        "0.5",
        "--p0",
        "-1",
        "--grid-n",
        "512",
        "--t-points",
        "6",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let (_, rows) = read_csv(&out);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[4] == 0.0));
}

#[test]
fn homodyne_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |out: &Path| {
        vec![
            "homodyne".to_owned(),
            "--grid-n".to_owned(),
            "256".to_owned(),
            "--samples".to_owned(),
            "2000".to_owned(),
            "--bootstrap".to_owned(),
            "100".to_owned(),
            "--seed".to_owned(),
            "9".to_owned(),
            "--out".to_owned(),
            out.to_str().unwrap().to_owned(),
        ]
    };
    let run = |out: &Path| {
        let v = args(out);
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        let o = wignerkin(&refs);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run(&a);
    run(&b);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let rec = read_json(&a);
    assert_eq!(rec["seed"], 9);
    assert_eq!(rec["samples_per_angle"], 2000);
}

#[test]
fn homodyne_csv_writes_samples_and_record() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    let o = wignerkin(&[
        "homodyne",
        "--state",
        "coherent",
        "--x0",
        "0",
        "--grid-n",
        "128",
        "--samples",
        "50",
        "--bootstrap",
        "20",
        "--format",
        "csv",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success());
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["theta", "sample"]);
    assert_eq!(rows.len(), 150);
    let rec = read_json(&dir.path().join("s.json"));
    assert!(rec["estimate"]["verdict"].is_string());
}

#[test]
fn homodyne_rejects_grid_without_zero() {
    let o = wignerkin(&[
        "homodyne",
        "--taus",
        "-0.2,0.2",
        "--samples",
        "10",
        "--bootstrap",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_lists_defaults() {
    let o = wignerkin(&["homodyne", "--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for needle in [
        "[default: 1000000]",
        "[default: 0.99]",
        "[default: 10000]",
        "[default: 42]",
        "[default: paper]",
    ] {
        assert!(text.contains(needle), "missing {needle}");
    }
}
