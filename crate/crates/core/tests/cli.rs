use std::fs;
use std::path::PathBuf;

use nonlocal_multisol::cli::{run, run_with_config};

const BASE: &str = r#"
schema_version = 1
[domain]
kind = "interval"
a = 0.0
b = 1.0
resolution = 128
[family]
kind = "b"
k = 1
[scan]
samples = 24
"#;

fn setup(text: &str) -> (tempfile::TempDir, PathBuf, String) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, text).unwrap();
    let out = dir.path().join("out").to_str().unwrap().to_string();
    (dir, cfg, out)
}

#[test]
fn check_writes_report_and_succeeds() {
    let (_d, cfg, out) = setup(BASE);
    assert_eq!(run_with_config("check", &cfg, &["--out", &out]), 0);
    let text = fs::read_to_string(PathBuf::from(&out).join("hypotheses.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["all_certified"], true);
    assert_eq!(v["hypotheses"].as_array().unwrap().len(), 6);
}

#[test]
fn usage_errors_exit_two() {
    let (_d, cfg, out) = setup(BASE);
    assert_eq!(run(["nonlocal-multisol"]), 2);
    assert_eq!(run(["nonlocal-multisol", "solve"]), 2);
    assert_eq!(run_with_config("scan", &cfg, &["--out", &out, "--k", "3"]), 2);
    assert_eq!(run_with_config("aux", &cfg, &["--out", &out, "--alpha", "1.0"]), 2);
    assert_eq!(run_with_config("aux", &cfg, &["--out", &out, "--alpha=-0.5"]), 2);
    assert_eq!(run_with_config("check", &cfg, &["--resolution", "2", "--out", &out]), 2);
    let (_d2, bad, out2) = setup(&BASE.replace("schema_version = 1", "schema_version = 2"));
    assert_eq!(run_with_config("check", &bad, &["--out", &out2]), 2);
}

#[test]
fn violated_hypothesis_blocks_scan_unless_forced() {
    let text = BASE.replace("k = 1\n", "k = 1\nscale = 1000.0\n");
    let (_d, cfg, out) = setup(&text);
    assert_eq!(run_with_config("check", &cfg, &["--out", &out]), 1);
    assert_eq!(run_with_config("scan", &cfg, &["--out", &out]), 1);
    assert!(!PathBuf::from(&out).join("pk_curve_1.csv").exists());
    let code = run_with_config("scan", &cfg, &["--out", &out, "--force"]);
    assert!(code == 0 || code == 1);
    assert!(PathBuf::from(&out).join("pk_curve_1.csv").exists());
}

#[test]
fn inadmissible_family_is_a_math_failure() {
    let text = BASE.replace("k = 1\n", "k = 1\nu = 0.1\n");
    let (_d, cfg, out) = setup(&text);
    assert_eq!(run_with_config("check", &cfg, &["--out", &out]), 1);
}

#[test]
fn aux_writes_profile_with_barrier() {
    let (_d, cfg, out) = setup(BASE);
    assert_eq!(run_with_config("aux", &cfg, &["--out", &out, "--alpha", "0.5"]), 0);
    let path = PathBuf::from(&out).join("aux_5.0000000000000000e-1.csv");
    let mut rdr = csv::Reader::from_path(path).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["x", "u", "z"]);
    let mut rows = 0;
    for r in rdr.records() {
        let r = r.unwrap();
        let u: f64 = r[1].parse().unwrap();
        let z: f64 = r[2].parse().unwrap();
        assert!(u > 0.0 && u >= z - 1e-12);
        rows += 1;
    }
    assert_eq!(rows, 128);
}

#[test]
fn solve_emits_bundle_and_profiles() {
    let (_d, cfg, out) = setup(BASE);
    assert_eq!(run_with_config("solve", &cfg, &["--out", &out]), 0);
    let out = PathBuf::from(out);
    let bundle = fs::read_to_string(out.join("bundle.csv")).unwrap();
    assert_eq!(bundle.lines().count(), 3);
    for name in ["report.json", "pk_curve_1.csv", "solution_1_1.csv", "solution_1_2.csv"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["bundle"]["ordering_certificate"], true);
    assert!(report["family_constants"]["n"].is_number());
}

#[test]
fn rectangle_domain_runs_check() {
    let text = BASE.replace(
        "kind = \"interval\"\na = 0.0\nb = 1.0\nresolution = 128",
        "kind = \"rectangle\"\nax = 0.0\nbx = 1.0\nay = 0.0\nby = 1.0\nresolution = 24",
    );
    let (_d, cfg, out) = setup(&text);
    assert_eq!(run_with_config("check", &cfg, &["--out", &out]), 0);
}
