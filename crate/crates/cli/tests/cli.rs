use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn freefall(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freefall")).args(args).current_dir(cwd).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn cc_prints_configuration_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = freefall(&["cc"], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["collinear"]["n"].as_f64().unwrap() - 1.1212).abs() < 2e-4);
    assert!((v["equilateral"]["collapse_time"].as_f64().unwrap() - 2.531895753).abs() < 1e-6);
    let out = freefall(&["cc", "--masses", "1,1,1", "--x", "1"], dir.path());
    let v = json(&out);
    assert!((v["collinear"]["n"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn simulate_writes_requested_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out = freefall(&["simulate", "near-equilateral", "--out-dir", "o", "--format", "csv,json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["outcome"]["kind"], "EllipticHyperbolic");
    let o = dir.path().join("o");
    assert!(o.join("near-equilateral.csv").exists());
    assert!(o.join("near-equilateral.events.json").exists());
    assert!(o.join("near-equilateral.report.json").exists());
    assert!(!o.join("near-equilateral.svg").exists());
}

#[test]
fn simulate_is_bitwise_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for d in ["a", "b"] {
        let out = freefall(&["simulate", "standish", "--t-end", "5", "--out-dir", d, "--format", "csv"], dir.path());
        assert!(out.status.success());
    }
    let a = fs::read(dir.path().join("a/standish.csv")).unwrap();
    let b = fs::read(dir.path().join("b/standish.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_then_analyze_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pyth.cfg"), "# Burrau by coordinates\nscenario=custom\nmasses=3,4,5\npositions=1,3,-2,-1,1,-1\nt_end=70\n")
        .unwrap();
    let out = freefall(&["simulate", "pyth.cfg", "--out-dir", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("o/pyth.csv");
    let out = freefall(&["analyze", csv.to_str().unwrap(), "--masses", "3,4,5"], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["outcome"]["kind"], "EllipticHyperbolic");
    let split = v["outcome"]["split_time"].as_f64().unwrap();
    assert!((58.9..=59.9).contains(&split));

    let events = dir.path().join("o/pyth.events.json");
    let out = freefall(
        &["plot", csv.to_str().unwrap(), "--events", events.to_str().unwrap(), "--t-max", "10", "-o", "early.svg"],
        dir.path(),
    );
    assert!(out.status.success());
    let svg = fs::read_to_string(dir.path().join("early.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert!(svg.contains("<circle"));
}

#[test]
fn tc_search_reports_angle() {
    let dir = tempfile::tempdir().unwrap();
    let out = freefall(&["tc-search", "--case", "bc1"], dir.path());
    assert!(out.status.success());
    let a = json(&out)["result"]["alpha"].as_f64().unwrap();
    assert!((a - 25.3663).abs() < 1e-3);
    let out = freefall(&["tc-search", "--case", "family"], dir.path());
    assert!(out.status.success());
    let v = json(&out)["result"]["v_y"].as_f64().unwrap();
    assert!((0.218..=0.225).contains(&v.abs()));
}

#[test]
fn sweep_is_ordered_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--scenario", "equilateral", "--param", "side", "--values", "1:2:3", "--format", "csv"];
    let out = freefall(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let sides: Vec<f64> = v.as_array().unwrap().iter().map(|r| r["key"]["side"].as_f64().unwrap()).collect();
    assert_eq!(sides, vec![1.0, 1.5, 2.0]);
    for r in v.as_array().unwrap() {
        assert_eq!(r["outcome"]["kind"], "PeriodicCandidate");
    }
    let rand = ["sweep", "--random", "4", "--seed", "11", "--t-end", "2", "--format", "csv"];
    let a = freefall(&rand, dir.path());
    let b = freefall(&rand, dir.path());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a).as_array().unwrap().len(), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(freefall(&["simulate", "nowhere"], dir.path()).status.code(), Some(2));
    assert_eq!(freefall(&["simulate", "burrau", "--format", "png"], dir.path()).status.code(), Some(2));
    assert_eq!(freefall(&["cc", "--masses", "1,-1,1"], dir.path()).status.code(), Some(2));
    assert_eq!(freefall(&["frobnicate"], dir.path()).status.code(), Some(2));
    fs::write(dir.path().join("clash.cfg"), "scenario=custom\nmasses=1,1,1\npositions=0,0,0,0,1,1\n").unwrap();
    assert_eq!(freefall(&["simulate", "clash.cfg"], dir.path()).status.code(), Some(2));
    // a tolerance far below rounding cannot be met
    let out = freefall(&["simulate", "equilateral", "--tol", "1e-30", "--format", "json", "--out-dir", "o"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["error"].is_string());
}
