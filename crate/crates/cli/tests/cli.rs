use std::process::{Command, Output};

use serde_json::Value;

fn cmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmlab")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = cmlab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("cmlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn class_set_of_disc_11() {
    let v = json(&["classset", "--disc", "11"]);
    assert_eq!(v["weights"], serde_json::json!([2, 3]));
    assert_eq!(v["mass"]["exact"], "5/6");
}

#[test]
fn bimodule_report() {
    let v = json(&["bimodule", "--p", "3"]);
    assert_eq!(v["admissible"], true);
    assert_eq!(v["type"], serde_json::json!([1, 1]));
    let v = json(&["bimodule", "--p", "7", "--choice", "sqrt-pu", "--precision", "6"]);
    assert_eq!(v["type"], serde_json::json!([1, 1]));
}

#[test]
fn equidist_csv_rows() {
    let out = cmlab(&["equidist", "--p", "3", "--q", "11", "--dK", "-3", "--nmax", "4", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("n,c,h,"));
    assert!(lines[1].starts_with("0,1,1,"));
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["equidist", "--p", "5", "--q", "11", "--dK", "-20", "--nmax", "3"];
    let a = cmlab(&args).stdout;
    let b = cmlab(&[&args[..], &["--jobs", "1"]].concat()).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(cmlab(&["model", "--p", "3", "--q", "11", "--dK", "-3", "--format", "dot"]).stdout,
               cmlab(&["model", "--p", "3", "--q", "11", "--dK", "-3", "--format", "dot"]).stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(cmlab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cmlab(&["bimodule", "--p", "2"]).status.code(), Some(2));
    assert_eq!(cmlab(&["model", "--p", "5", "--q", "2", "--dK", "-11"]).status.code(), Some(2));
    assert_eq!(cmlab(&["classset", "--disc", "11", "--format", "dot"]).status.code(), Some(2));
    let bad = cmlab(&["classset", "--disc", "11", "--output", "/nonexistent/dir/out.json"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn dry_runs() {
    let cases: [&[&str]; 9] = [
        &["algebra", "--q", "5"],
        &["classset", "--disc", "11"],
        &["brandt", "--disc", "11", "--n", "2"],
        &["embeddings", "--disc", "2", "--level", "3", "--dK", "-3"],
        &["model", "--p", "3", "--q", "11", "--dK", "-3"],
        &["bimodule", "--p", "5"],
        &["tree", "--p", "3", "--radius", "2"],
        &["equidist", "--p", "3", "--q", "11", "--dK", "-3"],
        &["simul", "--p", "3,7", "--q", "2", "--dK", "-84", "--nmax", "2"],
    ];
    for args in cases {
        let v = json(&[args, &["--dry-run"]].concat());
        assert_eq!(v["dry_run"], true, "{args:?}");
        assert_eq!(v["valid"], true, "{args:?}");
    }
    assert_eq!(cmlab(&["model", "--p", "3", "--q", "3", "--dK", "-3", "--dry-run"]).status.code(), Some(2));
}

#[test]
fn output_file_and_config_precedence() {
    let cfg = tmp("run.conf");
    std::fs::write(&cfg, "# defaults\np = 3\nq = 11\ndK = -3\nnmax = 2\n").unwrap();
    let from_file = json(&["equidist", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_file["config"]["n_max"], 2);
    let overridden = json(&["equidist", "--config", cfg.to_str().unwrap(), "--nmax", "3"]);
    assert_eq!(overridden["config"]["n_max"], 3);

    let out = tmp("classes.json");
    let status = cmlab(&["classset", "--disc", "11", "--output", out.to_str().unwrap()]);
    assert!(status.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["weights"], serde_json::json!([2, 3]));
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_cmlab"))
        .args(["bimodule", "--p", "5"])
        .env("CMLAB_PRECISION", "6")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["type"], serde_json::json!([1, 1]));
}
