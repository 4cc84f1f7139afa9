mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::fixture_path;
use scenelang::render::read_ppm;

fn scenelang(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scenelang"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn fx(name: &str) -> String {
    fixture_path(name).display().to_string()
}

#[test]
fn check_accepts_fixtures_and_rejects_bad_programs() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["chessboard.sl", "rotating_arm.sl", "minecraft_house.sl"] {
        let out = scenelang(&["check", &fx(name)], dir.path());
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let bad = dir.path().join("bad.sl");
    fs::write(&bad, "(bind \"x\" (lambda (z zs) (union (transform (call \"y\" (embed)) (translate 1 2)))))").unwrap();
    let out = scenelang(&["check", "bad.sl"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.sl:1:"));

    fs::write(dir.path().join("unbalanced.sl"), "(bind \"x\"").unwrap();
    assert_eq!(scenelang(&["check", "unbalanced.sl"], dir.path()).status.code(), Some(2));
    assert_eq!(scenelang(&["check", "missing.sl"], dir.path()).status.code(), Some(4));
    assert_eq!(scenelang(&["frobnicate"], dir.path()).status.code(), Some(1));
}

#[test]
fn run_writes_entity_json_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = scenelang(&["run", &fx("two_cubes.sl"), "--report"], dir.path());
    assert!(out.status.success());
    let tree: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(tree["word"], "pair");
    assert_eq!(tree["children"].as_array().unwrap().len(), 2);
    assert!(!out.stderr.is_empty());

    let out = scenelang(&["run", &fx("rotating_arm.sl")], dir.path());
    let frames: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(frames.as_array().unwrap().len(), 12);

    let deep = scenelang(&["run", &fx("fractal_tree.sl"), "--max-depth", "2"], dir.path());
    assert_eq!(deep.status.code(), Some(3));
}

#[test]
fn render_writes_ppm_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let out = scenelang(
        &["render", &fx("three_objects.sl"), "--size", "48x32", "--mode", "semantic", "--out", "sem.ppm", "--labels", "sem.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let img = read_ppm(&fs::read(dir.path().join("sem.ppm")).unwrap()).unwrap();
    assert_eq!((img.width, img.height), (48, 32));
    let labels: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("sem.json")).unwrap()).unwrap();
    assert!(labels.is_object() || labels.is_array());

    let out = scenelang(&["render", &fx("sphere.sl"), "--size", "16x16"], dir.path());
    assert!(out.status.success());
    assert!(dir.path().join("sphere.ppm").exists());

    let out = scenelang(&["render", &fx("sphere.sl"), "--size", "0x16"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn export_formats() {
    let dir = tempfile::tempdir().unwrap();
    let xml = scenelang(&["export", &fx("still_life.sl"), "--format", "xml"], dir.path());
    assert!(xml.status.success());
    let text = String::from_utf8(xml.stdout).unwrap();
    assert!(roxmltree::Document::parse(&text).is_ok());

    let layout = scenelang(&["export", &fx("still_life.sl"), "--format", "layout"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&layout.stdout).unwrap();
    assert!(v.to_string().contains("pillar"));

    let blocks = scenelang(&["export", &fx("minecraft_house.sl"), "--format", "minecraft"], dir.path());
    assert!(blocks.status.success(), "{}", String::from_utf8_lossy(&blocks.stderr));
    let grid = scenelang::backends::VoxelGrid::from_json(std::str::from_utf8(&blocks.stdout).unwrap()).unwrap();
    assert_eq!(grid.len(), 258);

    let rotated = scenelang(&["export", &fx("chessboard.sl"), "--format", "minecraft"], dir.path());
    assert_eq!(rotated.status.code(), Some(3));
}

#[test]
fn animate_writes_one_file_per_frame() {
    let dir = tempfile::tempdir().unwrap();
    let out = scenelang(&["animate", &fx("rotating_arm.sl"), "--size", "24x24", "--out-dir", "anim"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<_> = fs::read_dir(dir.path().join("anim")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 12);
    assert_eq!(names[11], "frame_0011.ppm");

    let stat = scenelang(&["animate", &fx("sphere.sl"), "--out-dir", "x"], dir.path());
    assert_eq!(stat.status.code(), Some(3));
}

#[test]
fn graph_is_dot() {
    let dir = tempfile::tempdir().unwrap();
    let out = scenelang(&["graph", &fx("two_cubes.sl")], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("digraph"));
    assert_eq!(text.matches("->").count(), 2);
}

#[test]
fn edit_applies_overrides_and_rebinds() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("o.json"),
        r#"[{"selector": {"by_word": "ball"}, "set": {"radius": 0.75}}]"#,
    )
    .unwrap();
    let out = scenelang(&["edit", &fx("still_life.sl"), "--overrides", "o.json", "--out", "edited.sl"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = scenelang(&["run", "edited.sl"], dir.path());
    assert!(String::from_utf8_lossy(&run.stdout).contains("0.75"));

    fs::write(
        dir.path().join("tile.sl"),
        r#"(lambda (z zs) (union (transform (call "tile" (embed (shape "sphere") (radius 0.3))) (identity))))"#,
    )
    .unwrap();
    let out = scenelang(&["edit", &fx("chessboard.sl"), "--rebind", "square=tile.sl", "--out", "board.sl"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = scenelang(&["run", "board.sl"], dir.path());
    assert_eq!(String::from_utf8_lossy(&run.stdout).matches("\"tile\"").count(), 64);

    fs::write(dir.path().join("none.json"), r#"[{"selector": {"by_word": "ghost"}, "set": {"radius": 1}}]"#).unwrap();
    let out = scenelang(&["edit", &fx("still_life.sl"), "--overrides", "none.json", "--out", "x.sl"], dir.path());
    assert_ne!(out.status.code(), Some(0));
    assert!(!dir.path().join("x.sl").exists());

    let out = scenelang(&["edit", &fx("still_life.sl"), "--rebind", "nonsense", "--out", "y.sl"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
