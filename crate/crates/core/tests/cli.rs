use std::path::Path;
use std::process::{Command, Output};

use adaptix::mesh::{io, structured_square_mesh, verify};
use adaptix::metric::MetricField;

fn adaptix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaptix")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_accepts_a_conforming_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.mesh");
    io::write_native(&structured_square_mesh(5), &file).unwrap();
    let out = adaptix(&["verify", s(&file)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("conforming (36 vertices, 50 elements)"));
}

#[test]
fn verify_rejects_an_inverted_element() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.mesh");
    std::fs::write(&file, "3 1\n0 0\n1 0\n0 1\n0 2 1\n3\n3\n3\n").unwrap();
    let out = adaptix(&["verify", s(&file)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unreadable_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = adaptix(&["verify", s(&dir.path().join("missing.mesh"))]);
    assert_eq!(out.status.code(), Some(2));
    let file = dir.path().join("garbage.mesh");
    std::fs::write(&file, "2 1\n0 0\nnot a number\n").unwrap();
    let out = adaptix(&["verify", s(&file)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("garbage.mesh:3"));
}

#[test]
fn adapt_command_writes_a_conforming_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let mesh_file = dir.path().join("in.mesh");
    let metric_file = dir.path().join("in.csv");
    let out_file = dir.path().join("out.mesh");
    let mesh = structured_square_mesh(10);
    io::write_native(&mesh, &mesh_file).unwrap();
    MetricField::uniform(mesh.vertex_count(), 0.04, 1e-3, 0.5, 1e-2)
        .write_csv(&metric_file)
        .unwrap();
    let out = adaptix(&["adapt", "--mesh", s(&mesh_file), "--metric", s(&metric_file), "--out", s(&out_file), "--threads", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let adapted = io::read_native(&out_file).unwrap();
    assert!(verify(&adapted).is_empty());
    assert!(adapted.alive_element_count() > 200);
}

#[test]
fn adapt_command_rejects_a_mismatched_metric() {
    let dir = tempfile::tempdir().unwrap();
    let mesh_file = dir.path().join("in.mesh");
    let metric_file = dir.path().join("in.csv");
    io::write_native(&structured_square_mesh(4), &mesh_file).unwrap();
    MetricField::uniform(3, 0.1, 1e-3, 0.5, 1e-2).write_csv(&metric_file).unwrap();
    let out_file = dir.path().join("out.mesh");
    let out = adaptix(&["adapt", "--mesh", s(&mesh_file), "--metric", s(&metric_file), "--out", s(&out_file)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_file.exists());
}

#[test]
fn bench_command_runs_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = adaptix(&[
        "bench", "--n", "16", "--steps", "2", "--threads", "2", "--eta", "0.05", "--hmin", "0.005", "--out",
        s(dir.path()), "--checks", "rounds",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("invariant checks: passed"));
    assert!(stdout.contains("no 1-thread baseline"));
    for f in ["stats.csv", "efficiency.csv", "quality_hist.csv", "final.mesh"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let out = adaptix(&["verify", s(&dir.path().join("final.mesh"))]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(adaptix(&["bench", "--n", "0", "--steps", "1"]).status.code(), Some(2));
    assert_ne!(adaptix(&["bench", "--threads", "many"]).status.code(), Some(0));
}
