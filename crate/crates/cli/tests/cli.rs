use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn framext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_framext")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_fixture(dir: &Path, name: &str) -> PathBuf {
    let d = dir.join(name);
    let out = framext(&["fixture", name, "--out-dir", d.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    d
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn check(fx: &Path, extra: &[&str]) -> (i32, Value) {
    let report = fx.join(format!("report{}.json", extra.len()));
    let (mesh, graph, frames) = (fx.join("mesh.txt"), fx.join("graph.txt"), fx.join("frames.txt"));
    let mut args = vec!["check", "--mesh", s(&mesh), "--graph", s(&graph), "--frames", s(&frames)];
    args.extend_from_slice(&["--report", s(&report)]);
    args.extend_from_slice(extra);
    let out = framext(&args);
    let json = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    (code(&out), json)
}

#[test]
fn check_exit_codes_follow_verdicts() {
    let dir = TempDir::new().unwrap();
    let (c, r) = check(&write_fixture(dir.path(), "ball"), &[]);
    assert_eq!(c, 0);
    assert_eq!(r["verdict"], "solvable");
    assert_eq!(r["system"]["equations"], 0);
    assert_eq!(r["witness_verified"], true);

    let (c, r) = check(&write_fixture(dir.path(), "torus"), &[]);
    assert_eq!(c, 0);
    assert_eq!(r["system"]["equations"], 2);

    let (c, r) = check(&write_fixture(dir.path(), "torus-twisted"), &[]);
    assert_eq!(c, 2);
    assert_eq!(r["verdict"], "unsolvable");
    assert!(r["certificate"]["face"].is_u64());
    assert!(r["witness"].is_null());
}

#[test]
fn no_merge_gives_the_same_verdict() {
    let dir = TempDir::new().unwrap();
    for name in ["torus", "torus-twisted", "tube"] {
        let fx = write_fixture(dir.path(), name);
        let (a, ra) = check(&fx, &[]);
        let (b, rb) = check(&fx, &["--no-merge"]);
        assert_eq!(a, b, "{name}");
        assert_eq!(ra["verdict"], rb["verdict"], "{name}");
        assert_eq!(rb["options"]["merge"], false);
    }
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let dir = TempDir::new().unwrap();
    let fx = write_fixture(dir.path(), "tube");
    let (_, mut a) = check(&fx, &[]);
    let (_, mut b) = check(&fx, &["--max-nodes", "100000000"]);
    assert_eq!(a["digest"], b["digest"]);
    a.as_object_mut().unwrap().remove("timing");
    b.as_object_mut().unwrap().remove("timing");
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a["inputs"]["mesh"].as_str().unwrap().len(), 64);
}

#[test]
fn node_cap_reports_cap_exceeded() {
    let dir = TempDir::new().unwrap();
    // The shell's second boundary component brings an x unknown that needs a decision.
    let fx = write_fixture(dir.path(), "shell");
    let (c, r) = check(&fx, &["--max-nodes", "0"]);
    assert_eq!(c, 3);
    assert_eq!(r["verdict"], "cap-exceeded");
    let (c, _) = check(&fx, &["--max-nodes", "10"]);
    assert_eq!(c, 0);
}

#[test]
fn extend_writes_a_verified_field() {
    let dir = TempDir::new().unwrap();
    for name in ["ball", "torus", "tube"] {
        let fx = write_fixture(dir.path(), name);
        let field = fx.join("field.txt");
        let report = fx.join("extend.json");
        let out = framext(&[
            "extend",
            "--mesh", s(&fx.join("mesh.txt")),
            "--graph", s(&fx.join("graph.txt")),
            "--frames", s(&fx.join("frames.txt")),
            "--field", s(&field),
            "--report", s(&report),
        ]);
        assert_eq!(code(&out), 0, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(r["field"]["violations"], 0, "{name}");
        assert!(std::fs::read_to_string(&field).unwrap().starts_with("field v1\n"));
    }
}

#[test]
fn extend_refuses_unsolvable_input() {
    let dir = TempDir::new().unwrap();
    let fx = write_fixture(dir.path(), "torus-twisted");
    let field = fx.join("field.txt");
    let out = framext(&[
        "extend",
        "--mesh", s(&fx.join("mesh.txt")),
        "--frames", s(&fx.join("frames.txt")),
        "--field", s(&field),
        "--report", s(&fx.join("r.json")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(!field.exists());
}

#[test]
fn dump_system_writes_one_line_per_equation() {
    let dir = TempDir::new().unwrap();
    let fx = write_fixture(dir.path(), "torus");
    let sys = fx.join("system.txt");
    let (c, _) = check(&fx, &["--dump-system", s(&sys)]);
    assert_eq!(c, 0);
    let text = std::fs::read_to_string(sys).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(':')).count(), 2);
}

#[test]
fn input_errors_exit_one_and_name_the_stage() {
    let dir = TempDir::new().unwrap();
    let fx = write_fixture(dir.path(), "ball");
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "frames v1\n0 1 0 0\n").unwrap();
    let out = framext(&["check", "--mesh", s(&fx.join("mesh.txt")), "--frames", s(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("frames"));

    let out = framext(&["check", "--mesh", s(&dir.path().join("missing")), "--frames", s(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mesh"));

    let out = framext(&["fixture", "klein-bottle"]);
    assert_eq!(code(&out), 1);
}

fn star_graph(dir: &Path, quarters: [i64; 3]) -> PathBuf {
    let p = dir.join(format!("star{}{}{}.txt", quarters[0], quarters[1], quarters[2]));
    let text = format!(
        "singgraph v1\nnodes 4\n10\n1\n2\n3\nedges 3\n0 1 {} : 10 1\n0 2 {} : 10 2\n0 3 {} : 10 3\n",
        quarters[0], quarters[1], quarters[2]
    );
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_reports_vertex_and_global_identities() {
    let dir = TempDir::new().unwrap();
    let good = star_graph(dir.path(), [4, 2, 2]);
    let out = framext(&["validate", "--graph", s(&good), "--euler", "1"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["graph"]["ok"], true);
    assert_eq!(r["graph"]["total_sum"], 4.0);

    let bad = star_graph(dir.path(), [1, 1, 1]);
    let out = framext(&["validate", "--graph", s(&bad), "--euler", "1"]);
    assert_eq!(code(&out), 2);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["graph"]["interior_violations"], serde_json::json!([0]));

    let unindexed = dir.path().join("u.txt");
    std::fs::write(&unindexed, "singgraph v1\nnodes 2\n1\n2\nedges 1\n0 1 ? : 1 2\n").unwrap();
    let out = framext(&["validate", "--graph", s(&unindexed), "--euler", "1"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn validate_reports_cross_loop_indices() {
    let dir = TempDir::new().unwrap();
    let good = star_graph(dir.path(), [4, 2, 2]);
    let n = 32;
    let mut text = format!("crossloop v1\nclosed true\nsamples {n}\n");
    for k in 0..n {
        text += &format!("{}\n", std::f64::consts::FRAC_PI_2 * k as f64 / n as f64);
    }
    let cl = dir.path().join("loop.txt");
    std::fs::write(&cl, text).unwrap();
    let out = framext(&["validate", "--graph", s(&good), "--euler", "1", "--crossloop", s(&cl)]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["loops"][0]["quarters"], 1);
}

#[test]
fn help_documents_defaults() {
    let out = framext(&["check", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--no-merge", "--epsilon", "--max-nodes", "--dump-system", "--transport", "100000000"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
}
