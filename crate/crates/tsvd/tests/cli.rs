use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tsvd::format::write_fmat;
use tsvd::sampling::laplace;

fn tsvd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsvd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn decompose_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let (input, fact) = (dir.path().join("w.fmat"), dir.path().join("w.tsvd"));
    write_fmat(&input, &laplace(48, 24, 3)).unwrap();
    let out = tsvd(&[
        "decompose",
        "--input",
        path(&input),
        "--out",
        path(&fact),
        "--tol",
        "0.1",
        "--theta",
        "0.785",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = json(&out);
    for key in [
        "m",
        "n",
        "k",
        "sparsity",
        "achieved_error",
        "compression_rate",
        "iterations",
    ] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    assert!(summary["achieved_error"].as_f64().unwrap() <= 0.1);

    let out = tsvd(&[
        "eval",
        "--fact",
        path(&fact),
        "--input",
        path(&input),
        "--d",
        "16",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["counts_match"], Value::Bool(true));
    assert_eq!(report["selfconsistent"], Value::Bool(true));
    assert_eq!(report["within_recorded"], Value::Bool(true));
    assert_eq!(report["k"], summary["k"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.fmat");
    std::fs::write(&bad, b"NOPE").unwrap();
    let out_path = dir.path().join("o.tsvd");
    let out = tsvd(&["decompose", "--input", path(&bad), "--out", path(&out_path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));

    let input = dir.path().join("w.fmat");
    write_fmat(&input, &laplace(32, 16, 1)).unwrap();
    let out = tsvd(&[
        "decompose",
        "--input",
        path(&input),
        "--out",
        path(&out_path),
        "--max-rank",
        "3",
        "--strict",
        "--theta",
        "0.785",
    ]);
    assert_eq!(out.status.code(), Some(3));

    let other = dir.path().join("x.fmat");
    write_fmat(&other, &laplace(8, 8, 1)).unwrap();
    let _ = tsvd(&[
        "decompose",
        "--input",
        path(&input),
        "--out",
        path(&out_path),
        "--tol",
        "0.3",
        "--theta",
        "0.785",
    ]);
    let out = tsvd(&["eval", "--fact", path(&out_path), "--input", path(&other)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gamma_marks_fifty_five() {
    let out = tsvd(&["gamma", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["last_at_least_cos_45"], Value::from(55));
    let text = String::from_utf8(tsvd(&["gamma"]).stdout).unwrap();
    let marked: Vec<&str> = text.lines().filter(|l| l.contains("<-")).collect();
    assert_eq!(marked.len(), 1);
    assert!(marked[0].starts_with("55"));
}

#[test]
fn qat_demo_reaches_the_optimum() {
    let out = tsvd(&["qat-demo", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let ratio = json(&out)["ratio"].as_f64().unwrap();
    assert!((1.0..=1.1).contains(&ratio), "{ratio}");
}

#[test]
fn study_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = tsvd(&[
            "study",
            "--study",
            "conv",
            "--seeds",
            "0,1",
            "--out",
            path(&out),
        ]);
        assert_eq!(status.status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert!(a.starts_with(b"seed,kernel,stride,tile,layout"));
    assert_eq!(a, run("b.csv"));
}
