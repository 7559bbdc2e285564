use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_visco2"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(c) = config {
        let p = dir.join("run.json");
        fs::write(&p, c).unwrap();
        cmd.arg("--config").arg(p);
    }
    cmd.output().unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

const GEN_SC: &str = r#"{"gen": {"kind": "periodic", "pattern": {"kind": "simple_cubic"},
    "epsilon": 0.125, "domain": "cube", "lambda": 0.01}}"#;

#[test]
fn gen_simple_cubic_eighth() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["gen"], Some(GEN_SC), d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let prov = json(d.path(), "provenance.json");
    let f = &prov["files"][0];
    assert_eq!(f["n"], 512);
    assert_eq!(f["hardcore_ok"], true);
    assert!((f["min_distance"].as_f64().unwrap() - 0.125).abs() < 1e-14);
    let text = fs::read_to_string(d.path().join("out").join(f["file"].as_str().unwrap())).unwrap();
    assert!(text.starts_with("# visco2 points v1 n=512 "));
    assert_eq!(text.lines().count(), 513);
}

#[test]
fn gen_matern_one_file_per_seed() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"gen": {"kind": "matern", "primary_intensity": 0.1, "hardcore": 1.0,
        "n": 300, "seeds": [3, 4], "lambda": 0.01}}"#;
    assert_eq!(run(&["gen"], Some(cfg), d.path()).status.code(), Some(0));
    let prov = json(d.path(), "provenance.json");
    let files = prov["files"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    for f in files {
        assert_eq!(f["hardcore_ok"], true);
        let n = f["n"].as_f64().unwrap();
        assert!((n - 300.0).abs() < 60.0, "n = {n}");
    }
}

#[test]
fn gen_rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = r#"{"gen": {"kind": "periodic",
        "pattern": {"kind": "random", "m": 4, "c": 0.5, "seed": 11},
        "epsilon": 0.2, "domain": "ball", "lambda": 0.02}}"#;
    for d in [&a, &b] {
        assert_eq!(run(&["gen"], Some(cfg), d.path()).status.code(), Some(0));
    }
    for name in ["provenance.json", "periodic_m4.txt"] {
        let x = fs::read(a.path().join("out").join(name)).unwrap();
        let y = fs::read(b.path().join("out").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn infeasible_hardcore_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"gen": {"kind": "periodic",
        "pattern": {"kind": "random", "m": 4, "c": 3.0, "seed": 1, "max_rejections": 2000},
        "epsilon": 0.25, "domain": "cube", "lambda": 0.01}}"#;
    let o = run(&["gen"], Some(cfg), d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn config_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let empty = r#"{"pairing": {"generator": {"kind": "lattice", "lambda": 0.01}, "n_list": []}}"#;
    assert_eq!(run(&["pairing"], Some(empty), d.path()).status.code(), Some(2));
    assert_eq!(run(&["pairing"], Some("{not json"), d.path()).status.code(), Some(2));
    assert_eq!(run(&["pairing"], Some(r#"{"pairng": {}}"#), d.path()).status.code(), Some(2));
    assert_eq!(run(&["lattice"], Some("{}"), d.path()).status.code(), Some(2));
    assert_eq!(run(&["corrector"], None, d.path()).status.code(), Some(2));
    let bad_strain = r#"{"lattice": {"pattern": {"kind": "simple_cubic"}, "strains": ["E7"]}}"#;
    assert_eq!(run(&["lattice"], Some(bad_strain), d.path()).status.code(), Some(2));
    assert_eq!(run(&["bogus"], None, d.path()).status.code(), Some(2));
}

#[test]
fn lattice_simple_cubic_reports_constants() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"lattice": {"pattern": {"kind": "simple_cubic"}}}"#;
    assert_eq!(run(&["lattice"], Some(cfg), d.path()).status.code(), Some(0));
    let v = json(d.path(), "lattice.json");
    assert_eq!(v["route"], "lattice_sum");
    assert!((v["params"]["a"].as_f64().unwrap() + 0.04644987814791).abs() < 1e-11);
    assert!((v["params"]["alpha"].as_f64().unwrap() - 9.467481722187).abs() < 1e-9);
    assert!((v["params"]["beta"].as_f64().unwrap() + 2.144987814791).abs() < 1e-9);
    let m5 = v["matrix5"].as_array().unwrap();
    assert_eq!(m5.len(), 5);
    assert!((m5[0][0].as_f64().unwrap() - 9.467481722187).abs() < 1e-9);
}

#[test]
fn pairing_lattice_study_writes_tables() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"pairing": {"generator": {"kind": "lattice", "lambda": 0.01},
        "n_list": [216, 512, 1000], "strains": ["E1"]}}"#;
    assert_eq!(run(&["pairing"], Some(cfg), d.path()).status.code(), Some(0));
    let v = json(d.path(), "pairing.json");
    assert_eq!(v["route"], "pairing");
    assert_eq!(v["params"]["n_list"], serde_json::json!([216, 512, 1000]));
    let csv = fs::read_to_string(d.path().join("out/pairing_E1.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,value,cauchy_diff,extrapolated");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[3].split(',').count(), 4);
    let dat = fs::read_to_string(d.path().join("out/pairing_E1.dat")).unwrap();
    assert_eq!(dat.lines().nth(1).unwrap().split_whitespace().count(), 3);
}

#[test]
fn pairing_from_point_file() {
    let d = tempfile::tempdir().unwrap();
    let g = r#"{"gen": {"kind": "lattice", "k": 4, "lambda": 0.01}}"#;
    assert_eq!(run(&["gen"], Some(g), d.path()).status.code(), Some(0));
    let pts = d.path().join("out/lattice_4.txt");
    let cfg = format!(r#"{{"pairing": {{"points": {:?}}}}}"#, pts.to_str().unwrap());
    let o = run(&["pairing"], Some(&cfg), d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(d.path(), "pairing.json");
    assert!(v["matrix5"].is_array());
}

#[test]
fn corrector_energy_route_and_sweep() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"threads": 2, "corrector": {"pattern": {"kind": "simple_cubic"},
        "eta_bar": 0.15, "N": 64, "strains": ["E1"], "eta_sweep": [0.12, 0.15], "export_field": true}}"#;
    let o = run(&["corrector"], Some(cfg), d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(d.path(), "corrector.json");
    assert_eq!(v["route"], "corrector_energy");
    let val = v["samples"][0]["value"].as_f64().unwrap();
    assert!((val - 9.467481722187).abs() < 1e-4, "{val}");
    let csv = fs::read_to_string(d.path().join("out/corrector_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let bin = fs::metadata(d.path().join("out/corrector_field_E1.bin")).unwrap();
    assert_eq!(bin.len(), 64 * 64 * 64 * 48);
}

#[test]
fn corrector_resolution_too_coarse() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"corrector": {"pattern": {"kind": "simple_cubic"}, "eta_bar": 0.1, "N": 32}}"#;
    assert_eq!(run(&["corrector"], Some(cfg), d.path()).status.code(), Some(2));
}

#[test]
fn isotropic_ergodic_comparison() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"isotropic": {"primary_intensity": 0.1, "hardcore": 1.0, "seeds": [1, 2],
        "ergodic": {"n": 2000, "decorrelation": 2.0, "bins": 20, "sides": [256, 512], "margin": 2.0}}}"#;
    assert_eq!(run(&["isotropic"], Some(cfg), d.path()).status.code(), Some(0));
    let v = json(d.path(), "isotropic.json");
    let cmp = v["comparison"].as_array().unwrap();
    assert_eq!(cmp.len(), 2);
    for row in cmp {
        assert!((row["reference"].as_f64().unwrap() - 2.5).abs() < 1e-12);
        assert!(row["rel_diff"].as_f64().unwrap() < 0.05, "{row}");
        assert!(row["error_bar"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn accept_subset_reports_status() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["accept", "--quick"], Some(r#"{"accept": {"criteria": [7]}}"#), d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("criterion 7 [PASS]"));
    let v = json(d.path(), "accept.json");
    assert_eq!(v["criteria"][0]["status"], "quick-pass");

    // the simple cubic constant misses its target, which must surface as exit 4
    let o = run(&["accept"], Some(r#"{"accept": {"criteria": [1]}}"#), d.path());
    assert_eq!(o.status.code(), Some(4));
    let v = json(d.path(), "accept.json");
    assert_eq!(v["criteria"][0]["status"], "fail");
    assert_eq!(v["passed"], false);
}
