//! End-to-end checks of the `severi` binary: exit-code conventions, wire
//! formats, and byte determinism of outputs across repeated runs and worker
//! counts.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_severi"))
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("severi-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn dim_on_one_point_file() {
    let points = write_temp(
        "one-point.json",
        r#"{ "points": [["0", "0", "1"]], "ordered": false }"#,
    );
    let out = run(&["dim", "--s", "2", "--points", points.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["proj_dim"], 2);
    assert_eq!(v["superabundance"], 0);
    assert_eq!(v["basis"].as_array().unwrap().len(), 3);
    // schema round trip: parse -> serialize -> parse gives the same value
    let re = serde_json::to_string_pretty(&v).unwrap();
    let v2: serde_json::Value = serde_json::from_str(&re).unwrap();
    assert_eq!(v, v2);
}

#[test]
fn plucker_single_point_wire_format() {
    let points = write_temp(
        "one-point-2.json",
        r#"{ "points": [["0", "0", "1"]], "ordered": false }"#,
    );
    let out = run(&["plucker", "--k", "2", "--points", points.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["k"], 2);
    assert_eq!(v["d"], 1);
    assert_eq!(v["coords"]["2,4,5"], "1");
}

#[test]
fn kd_reports_critical_degree_two() {
    let out = run(&[
        "kd",
        "--d",
        "2",
        "--s-max",
        "6",
        "--seed",
        "42",
        "--samples",
        "3",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["k_hat"], 3);
    assert_eq!(v["k_hat_alt"], 2);
    assert!(v["repro"]["crosscheck_modulus"].as_u64().unwrap() > 0);
}

#[test]
fn limit_of_collision_family() {
    let family = write_temp(
        "family.json",
        r#"{ "paths": [ [["0"], ["0"], ["1"]], [["0","1"], ["0"], ["1"]] ], "t_star": "0" }"#,
    );
    let out = run(&["limit", "--k", "3", "--family", family.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["decomposable"], true);
    assert_eq!(v["collisions"][0]["limit_singular_at_point"], true);
}

#[test]
fn synth_certify_round_trip() {
    let out = run(&["synth", "--n", "3", "--d", "1", "--seed", "7"]);
    assert!(out.status.success(), "synth failed: {out:?}");
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let curve = serde_json::to_string(&v["curve"]).unwrap();
    let nodes = serde_json::to_string(&serde_json::json!({
        "points": v["nodes"]["points"],
        "ordered": false
    }))
    .unwrap();
    let curve_path = write_temp("synth-curve.json", &curve);
    let nodes_path = write_temp("synth-nodes.json", &nodes);
    let out = run(&[
        "certify",
        "--curve",
        curve_path.to_str().unwrap(),
        "--nodes",
        nodes_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "certify failed: {out:?}");
    let cert: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(cert["squarefree"], true);
    assert_eq!(cert["irreducibility"], "certified");
}

#[test]
fn certify_refutes_cusp_with_exit_one() {
    // y^2 z - x^3, claimed node at (0:0:1): degenerate singularity
    let curve = write_temp(
        "cusp.json",
        r#"{ "degree": 3, "field": "rational",
             "coeffs": ["-1","0","0","0","0","0","0","1","0","0"] }"#,
    );
    let nodes = write_temp(
        "cusp-nodes.json",
        r#"{ "points": [["0","0","1"]], "ordered": false }"#,
    );
    let out = run(&[
        "certify",
        "--curve",
        curve.to_str().unwrap(),
        "--nodes",
        nodes.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!(v["refuted"]["NotANode"].is_object(), "got {v}");
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["kd", "--unknown-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    // malformed JSON names the file and position
    let bad = write_temp("bad.json", "{ not json");
    let out = run(&["dim", "--s", "2", "--points", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("bad.json") && err.contains("line"),
        "stderr: {err}"
    );
}

#[test]
fn field_mode_and_modulus_env() {
    let points = write_temp(
        "fp-points.json",
        r#"{ "points": [["1", "0", "1"]], "ordered": false }"#,
    );
    let out = run(&[
        "dim",
        "--s",
        "2",
        "--field",
        "fp:101",
        "--points",
        points.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["basis"][0]["field"], "fp:101");

    // bare "fp" uses the environment override
    let out = bin()
        .args([
            "dim",
            "--s",
            "2",
            "--field",
            "fp",
            "--points",
            points.to_str().unwrap(),
        ])
        .env("SEVERI_MODULUS", "10007")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["basis"][0]["field"], "fp:10007");

    // synth refuses prime-field mode
    let out = run(&["synth", "--n", "3", "--d", "1", "--field", "fp:101"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_is_byte_deterministic_across_jobs() {
    let runs: Vec<Vec<u8>> = [
        vec!["selftest", "--seed", "42", "--jobs", "1"],
        vec!["selftest", "--seed", "42", "--jobs", "1"],
        vec!["selftest", "--seed", "42", "--jobs", "4"],
    ]
    .iter()
    .map(|args| {
        let out = run(args);
        assert!(out.status.success(), "selftest failed: {out:?}");
        out.stdout
    })
    .collect();
    assert_eq!(runs[0], runs[1], "repeated runs differ");
    assert_eq!(runs[0], runs[2], "jobs=1 vs jobs=4 differ");
}

#[test]
fn kd_is_byte_deterministic_across_jobs() {
    // the scan parallelizes rank computations; output must not depend on it
    let runs: Vec<Vec<u8>> = ["1", "4"]
        .iter()
        .map(|jobs| {
            let out = run(&[
                "kd",
                "--d",
                "2",
                "--s-max",
                "5",
                "--seed",
                "9",
                "--samples",
                "3",
                "--jobs",
                jobs,
            ]);
            assert!(out.status.success());
            out.stdout
        })
        .collect();
    assert_eq!(runs[0], runs[1], "kd output depends on --jobs");
}

#[test]
fn table_text_format_is_aligned_grid() {
    let out = run(&[
        "table",
        "--s-max",
        "3",
        "--d-max",
        "2",
        "--samples",
        "2",
        "--format",
        "text",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4); // header + s = 1..3
    assert!(lines[0].contains("s\\d"));
}
