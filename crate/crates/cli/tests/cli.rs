use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_herzmorrey"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("herzmorrey-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

#[test]
fn lq_norm_of_interval_indicator() {
    let o = run(&["norm", "--space", "lq", "--q", "const:2", "--f", "indicator:-1:1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1.414214");
}

#[test]
fn herz_and_herz_morrey_norms_of_annulus() {
    let o = run(&[
        "norm",
        "--space",
        "herz-morrey",
        "--alpha",
        "1",
        "--p",
        "2",
        "--lambda",
        "0.5",
        "--q",
        "const:2",
        "--f",
        "annulus:1",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "2.000000");
    let o = run(&[
        "norm",
        "--space",
        "herz",
        "--alpha",
        "1",
        "--p",
        "2",
        "--q",
        "const:2",
        "--f",
        "annulus:1",
    ]);
    assert_eq!(stdout(&o).trim(), "2.828427");
}

#[test]
fn modular_curve_dump() {
    let dir = scratch("dump");
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("curve.csv");
    let o = run(&[
        "norm",
        "--q",
        "decay",
        "--f",
        "ball:0",
        "--dump",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("eta,modular\n"));
    assert!(csv.lines().count() > 10);
}

#[test]
fn operator_point_values() {
    let o = run(&["operator", "maximal", "--f", "indicator:-1:1", "--at", "0"]);
    assert_eq!(stdout(&o).trim(), "2.000000");
    let o = run(&[
        "operator",
        "ibeta",
        "--beta",
        "0.5",
        "--f",
        "indicator:-1:1",
        "--at",
        "0",
    ]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 4.0).abs() < 1e-3);
    let o = run(&[
        "operator",
        "ibeta",
        "--beta",
        "0.5",
        "--f",
        "indicator:-1:1",
        "--at",
        "2",
    ]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 1.4641).abs() < 1e-3);
}

#[test]
fn operator_field_dump() {
    let dir = scratch("field");
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("field.csv");
    let o = run(&[
        "operator",
        "maximal",
        "--f",
        "ball:0",
        "--m",
        "256",
        "--dump",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("x,f,Tf\n"));
    assert_eq!(csv.lines().count(), 257);
}

#[test]
fn lemma_suite_passes_for_constant_exponent() {
    let dir = scratch("lemmas");
    let o = run(&[
        "verify",
        "--suite",
        "lemmas",
        "--q",
        "const:2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("Lemma2.1-Holder") && !out.contains("FAIL"));
    let csv = fs::read_to_string(dir.join("cases.csv")).unwrap();
    assert!(csv.starts_with("statement_id,case,lhs,rhs,ratio\n"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("001_Lemma2.1-Holder.json")).unwrap()).unwrap();
    for key in [
        "statement_id",
        "params",
        "cases",
        "c_estimate",
        "stable",
        "admissible",
        "metadata",
    ] {
        assert!(json.get(key).is_some(), "{key}");
    }
}

#[test]
fn theorem31_with_decay_profile_reports_stable_ratio() {
    let dir = scratch("t31");
    let o = run(&[
        "verify",
        "--suite",
        "theorem31",
        "--q",
        "decay",
        "--alpha",
        "0",
        "--lambda",
        "0.5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("000_Theorem3.1.json")).unwrap()).unwrap();
    assert_eq!(json["stable"], true);
    assert!(json["c_estimate"].as_f64().unwrap().is_finite());
}

#[test]
fn exponent_below_one_is_a_hypothesis_violation() {
    let dir = scratch("bad");
    let o = run(&[
        "verify",
        "--suite",
        "lemmas",
        "--q",
        "const:0.9",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1< essinf"));
}

#[test]
fn malformed_input_exits_with_config_error() {
    let o = run(&["norm", "--f", "triangle:1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["norm", "--q", "wobbly", "--f", "zero"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = scratch("cfg");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.json");
    fs::write(&cfg, "{\"grid\": 3}").unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_assertions_exit_one_and_still_write_reports() {
    // the fitted delta of a variable exponent sits above its window bound
    let dir = scratch("fail");
    let o = run(&[
        "verify",
        "--suite",
        "lemmas",
        "--q",
        "decay",
        "--m",
        "1024",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
    assert!(dir.join("cases.csv").exists());
}

#[test]
fn config_runs_are_byte_identical_apart_from_metadata() {
    let dir = scratch("det");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("suite.json");
    fs::write(
        &cfg,
        r#"{"grid": {"n": 1, "R": 8, "m": 1024}, "exponents": ["const:2", "decay"],
            "operators": [{"name": "maximal"}, {"name": "ibeta", "beta": 0.25}],
            "spaces": [{"lambda": 0.5, "p": 1, "p2": 2}],
            "suites": ["theorem31", "theorem32", "size"], "trials": 8, "seed": 42}"#,
    )
    .unwrap();
    let strip = |path: PathBuf| {
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("metadata");
        v.to_string()
    };
    let mut runs = Vec::new();
    for tag in ["a", "b"] {
        let out = dir.join(tag);
        let o = run(&[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stdout(&o));
        let mut names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        names.sort();
        runs.push(names);
    }
    assert_eq!(runs[0].len(), runs[1].len());
    for (a, b) in runs[0].iter().zip(&runs[1]) {
        if a.extension().is_some_and(|e| e == "json") {
            assert_eq!(strip(a.clone()), strip(b.clone()));
        } else {
            assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
        }
    }
}
