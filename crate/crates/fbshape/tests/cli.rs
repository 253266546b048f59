//! End-to-end checks of the command-line surface: exit codes, emitted
//! artifacts, and byte-level determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fbshape")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn fbshape")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn oracle_prints_paper_value() {
    let out = run(&["oracle", "--N", "2", "--R", "1", "--quantity", "grad_v_bdry"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "0.0625");
}

#[test]
fn oracle_rejects_unknown_quantity() {
    let out = run(&["oracle", "--N", "2", "--R", "1", "--quantity", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_is_input_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_emits_mesh_and_field_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "solve",
        "--domain",
        data("disk.json").to_str().unwrap(),
        "--source",
        "const:1",
        "--h-factor",
        "0.08",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in [
        "nodes.csv",
        "tris.csv",
        "u.csv",
        "v.csv",
        "w.csv",
        "z.csv",
        "flux_u.csv",
        "summary.json",
        "domain.svg",
        "manifest.json",
    ] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let nodes = fs::read_to_string(out_dir.join("nodes.csv")).unwrap();
    assert!(nodes.starts_with("id,x,y,boundary_flag\n"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema"], "fbshape/1");
    let balance = summary["boundary_flux_u"].as_f64().unwrap() / summary["int_f"].as_f64().unwrap();
    assert!((balance - 1.0).abs() < 1e-10, "flux balance off: {balance}");
}

#[test]
fn verify_reports_strict_flux_balance() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "verify",
        "--domain",
        data("disk.json").to_str().unwrap(),
        "--convex",
        data("halfdisk.json").to_str().unwrap(),
        "--k",
        "0.05",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    let entries = report["existence"]["entries"].as_array().unwrap();
    let thm22 = entries.iter().find(|e| e["name"] == "thm_2_2_flux_balance").unwrap();
    assert_eq!(thm22["verdict"], "strict");
    assert!(report["didenko"]["spread"].as_f64().unwrap() < 0.02);
}

#[test]
fn cgnp_failure_is_verdict_exit() {
    // ρ = 1.5 + 0.5cos5θ has indentations whose normal cones reach back into
    // the domain relative to the centered square
    let dir = tempfile::tempdir().unwrap();
    let dpath = dir.path().join("indented.json");
    fs::write(
        &dpath,
        r#"{"center":[0,0],"a0":1.5,"cos":[0,0,0,0,0.5],"sin":[]}"#,
    )
    .unwrap();
    let out = run(&[
        "cgnp",
        "--domain",
        dpath.to_str().unwrap(),
        "--convex",
        data("square.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stdout(&out));
    assert!(stdout(&out).starts_with("fails"));

    let ok = run(&[
        "cgnp",
        "--domain",
        data("disk.json").to_str().unwrap(),
        "--convex",
        data("square.json").to_str().unwrap(),
    ]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn cheeger_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = run(&[
            "cheeger",
            "--convex",
            data("square.json").to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).starts_with("h=3.7724"));
        paths.push(out_dir);
    }
    for f in ["cheeger.json", "cheeger.svg", "manifest.json"] {
        let a = fs::read(paths[0].join(f)).unwrap();
        let b = fs::read(paths[1].join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
}

#[test]
fn flow_converges_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "flow",
        "--problem",
        "serrin",
        "--k",
        "0.5",
        "--init",
        data("wobble.json").to_str().unwrap(),
        "--tol",
        "3e-3",
        "--h-factor",
        "0.05",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "converged");
    let radius = report["best_fit_radius"].as_f64().unwrap();
    assert!((radius - 1.0).abs() < 0.02, "radius {radius}");
    let history = fs::read_to_string(out_dir.join("history.csv")).unwrap();
    assert!(history.starts_with("iter,residual,area,perimeter\n"));
    assert!(history.lines().count() > 2);
    let final_domain: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("final.json")).unwrap()).unwrap();
    assert!((final_domain["a0"].as_f64().unwrap() - 1.0).abs() < 0.02);
}

#[test]
fn flow_requires_problem_parameters() {
    let out = run(&[
        "flow",
        "--problem",
        "serrin",
        "--init",
        data("wobble.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
