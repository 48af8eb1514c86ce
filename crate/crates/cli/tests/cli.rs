use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdlab")).args(args).output().expect("spawn fdlab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn with_config(dir: &Path, cmd: &str, cfg: &Value, out: &str) -> Output {
    let path = dir.join(format!("{out}.json"));
    fs::write(&path, cfg.to_string()).unwrap();
    let out = dir.join(out);
    fdlab(&[cmd, "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn tiny_c1() -> Value {
    json!({
        "params": {"n": 3, "m": 0.2, "beta": 3.0},
        "initial": {"kind": "sandwich_blend", "lambda_1": 0.8, "lambda_2": 1.25, "lambda_0": 1.0},
        "grid": {"h": 0.02, "r_max": 20.0},
        "tau_end": 0.3,
        "sample_every": 0.1,
        "reference_lambda": 1.0
    })
}

#[test]
fn params_reports_the_barenblatt_point() {
    let o = fdlab(&["params", "3", "0.2", "2.5"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["params"]["gamma_2"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(v["regime"]["label"], "C3i");
    assert_eq!(v["regime"]["sign_a1"], "zero");
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(code(&fdlab(&["params", "3", "0.9", "1"])), 2);
    assert_eq!(code(&fdlab(&["params", "3", "0.2", "-1"])), 2);
    assert_eq!(code(&fdlab(&["params", "3", "0.2"])), 2);
    assert_eq!(code(&fdlab(&["profile"])), 2);
    assert_eq!(code(&fdlab(&["--threads", "0", "params", "3", "0.2", "3"])), 2);
    assert_eq!(code(&fdlab(&["profile", "--config", "/nonexistent/cfg.json"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let unknown = json!({"params": {"n": 3, "m": 0.2, "beta": 3.0}, "colour": "red"});
    assert_eq!(code(&with_config(d, "profile", &unknown, "a")), 2);
    let bad_grid = json!({"params": {"n": 3, "m": 0.2, "beta": 3.0}, "grid": {"r_max": 0.5}, "fit": false});
    assert_eq!(code(&with_config(d, "profile", &bad_grid, "b")), 2);
    let short_fit = json!({"params": {"n": 3, "m": 0.2, "beta": 3.0}, "grid": {"r_max": 10.0}});
    assert_eq!(code(&with_config(d, "profile", &short_fit, "c")), 2);

    let mut no_ref = tiny_c1();
    no_ref.as_object_mut().unwrap().remove("reference_lambda");
    let o = with_config(d, "evolve", &no_ref, "d");
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("reference_lambda"));

    let mut env_in_c1 = tiny_c1();
    env_in_c1["envelope"] = json!({"lam_hi": 2.0});
    assert_eq!(code(&with_config(d, "evolve", &env_in_c1, "e")), 2);

    let mut outside = tiny_c1();
    outside["initial"] = json!({"kind": "sandwich_blend", "lambda_1": 0.8, "lambda_2": 1.25, "lambda_0": 2.0});
    assert_eq!(code(&with_config(d, "evolve", &outside, "f")), 2);

    let sweep = json!({"kind": "runs", "command": "profile", "base": {"params": {"n": 3, "m": 0.2, "beta": 3.0}},
                       "overrides": [{}, {"params": {"mass": 1}}]});
    assert_eq!(code(&with_config(d, "sweep", &sweep, "g")), 2);
    assert!(!d.join("g").join("run_0").exists(), "nothing runs when a merged config is invalid");
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut evolve = tiny_c1();
    evolve["contraction"] = json!({"partner": {"kind": "profile_exact", "lambda_0": 1.0}, "upper_lambda": 1.25});
    evolve["ordering"] =
        json!({"partner": {"kind": "sandwich_blend", "lambda_1": 0.8, "lambda_2": 1.25, "lambda_0": 1.1}});
    evolve["aronson_benilan"] = json!({"tau_min": 0.1});
    let profile = json!({"params": {"n": 3, "m": 0.2, "beta": 2.2}, "lambdas": [1.0, 2.0], "grid": {"r_max": 1e8}, "write_trace": true});
    let sweep = json!({"kind": "runs", "command": "profile", "base": profile,
                       "overrides": [{}, {"params": {"beta": 3.0}}, {"params": {"beta": 2.5}}]});
    let c2 = json!({
        "params": {"n": 3, "m": 0.2, "beta": 2.2},
        "initial": {"kind": "min_profiles", "lambda_1": 1.0, "lambda_2": 2.0},
        "grid": {"h": 0.02},
        "tau_end": 0.5,
        "sample_every": 0.25,
        "envelope": {"lam_hi": 2.0}
    });
    for run in ["1", "2"] {
        assert_eq!(code(&with_config(d, "evolve", &evolve, &format!("evolve{run}"))), 0);
        assert_eq!(code(&with_config(d, "evolve", &c2, &format!("c2_{run}"))), 0);
        assert_eq!(code(&with_config(d, "sweep", &sweep, &format!("sweep{run}"))), 0);
    }
    for name in ["evolve", "c2_", "sweep"] {
        let a = snapshot(&d.join(format!("{name}1")));
        let b = snapshot(&d.join(format!("{name}2")));
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name} outputs differ between runs");
    }
    let names: Vec<String> = snapshot(&d.join("evolve1")).into_iter().map(|f| f.0).collect();
    for f in ["report.csv", "contraction.csv", "ordering.csv", "aronson_benilan.json", "summary.json"] {
        assert!(names.iter().any(|n| n == f), "missing {f}");
    }
    assert!(d.join("c2_1").join("envelope.csv").exists());
    assert!(d.join("sweep1").join("run_2").join("trace_lambda_2.csv").exists());
}

#[test]
fn regime_table_sweep_writes_a_labelled_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"kind": "regime_table", "dims": [3, 6], "m_points": 5, "beta_points": 8});
    let o = with_config(dir.path(), "sweep", &cfg, "rt");
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("rt").join("regime_table.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "n,m,beta,label,sign_a1,a1,gamma_1,gamma_2,beta_e,beta_0,beta_1");
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let points = v["points"].as_u64().unwrap() as usize;
    assert_eq!(rows.len(), points + 1);
    assert_eq!(points + v["skipped"].as_u64().unwrap() as usize, 2 * 5 * 9);
}

#[test]
fn unconverged_tail_integral_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"params": {"n": 3, "m": 0.2, "beta": 2.2}, "grid": {"r_max": 1e3}});
    let o = with_config(dir.path(), "profile", &cfg, "p");
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("stabilized"));
}
