//! End-to-end checks of the command-line surface: exit codes, file
//! formats, determinism of exports and round-trip validation.

use std::path::{Path, PathBuf};
use std::process::Command;

use maspa::oracle::validate_plan;
use maspa::planner::PlanResult;
use maspa::scenario::BENCH_CSV_HEADER;
use maspa::Scene;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_maspa"))
}

fn write_obstacle_free_scene(dir: &Path) -> PathBuf {
    let path = dir.join("scene.json");
    let text = r#"{
        "bounds": {"min": [-50.0, -50.0, 0.0], "max": [50.0, 50.0, 50.0]},
        "obstacles": [],
        "start": [-20.0, 0.0],
        "targets": [[0.0, 0.0, 26.0]],
        "params": {"h": 1.5, "r": 0.5, "L": 50.0}
    }"#;
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn plan_obstacle_free_matches_hand_computed_total() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_obstacle_free_scene(dir.path());
    let out = dir.path().join("plan.json");
    let status = bin()
        .args(["plan"])
        .arg(&scene)
        .args(["--mode", "taut", "--p", "4", "--q", "30", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let plan: PlanResult = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    // Start 20 m out, rise 25: the optimum keeps the carrier in place.
    let optimum = 1025.0_f64.sqrt();
    let spacing = (2500.0_f64 - 625.0).sqrt() / 29.0;
    assert!(plan.total_length >= optimum - 1e-9);
    assert!(plan.total_length <= optimum + spacing);
    // Exported plans re-validate from scratch.
    let scene = Scene::from_json(&std::fs::read_to_string(&scene).unwrap()).unwrap();
    validate_plan(&scene, &plan).unwrap();
}

#[test]
fn plan_short_tether_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.json");
    let text = std::fs::read_to_string(write_obstacle_free_scene(dir.path())).unwrap();
    std::fs::write(&path, text.replace("\"L\": 50.0", "\"L\": 1.0")).unwrap();
    let output = bin().arg("plan").arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&output.stderr).unwrap();
    assert_eq!(err["error"], "unreachable");
}

#[test]
fn invalid_scene_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scene.json");
    std::fs::write(&path, "{\"not\": \"a scene\"}").unwrap();
    let output = bin().arg("plan").arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&output.stderr).unwrap();
    assert_eq!(err["error"], "invalid-input");
}

#[test]
fn gen_is_deterministic_and_bench_writes_exact_header() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let status = bin()
            .args(["gen", "--seed", "5", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    Scene::from_json(&std::fs::read_to_string(&a).unwrap()).unwrap();

    let csv = dir.path().join("results.csv");
    let status = bin()
        .args([
            "bench",
            "--seeds",
            "3..3",
            "--p-set",
            "2",
            "--q-set",
            "6",
            "--planners",
            "maspa,maspa-minus",
            "--c",
            "6",
            "--out",
        ])
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), BENCH_CSV_HEADER);
    assert_eq!(lines.clone().count(), 2);
    for line in lines {
        assert_eq!(line.split(',').count(), 13);
    }
}

#[test]
fn rrt_subcommand_plans_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let scene_path = write_obstacle_free_scene(dir.path());
    let out = dir.path().join("plan.json");
    let status = bin()
        .args(["rrt"])
        .arg(&scene_path)
        .args(["--budget", "0.5", "--seed", "4", "--c", "8", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let plan: PlanResult = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(plan.planner, "rrt_star");
    let scene = Scene::from_json(&std::fs::read_to_string(&scene_path).unwrap()).unwrap();
    validate_plan(&scene, &plan).unwrap();
}

#[test]
fn svg_export_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.json");
    let status = bin()
        .args(["gen", "--seed", "9", "--out"])
        .arg(&scene)
        .status()
        .unwrap();
    assert!(status.success());

    let top_a = dir.path().join("top_a.svg");
    let top_b = dir.path().join("top_b.svg");
    for out in [&top_a, &top_b] {
        let status = bin()
            .args(["export"])
            .arg(&scene)
            .args(["--view", "top", "--svg"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let bytes = std::fs::read(&top_a).unwrap();
    assert_eq!(bytes, std::fs::read(&top_b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("<svg xmlns"));
    assert!(text.contains("<rect"));

    // Plane view of the beam's first half-plane.
    let plane = dir.path().join("plane.svg");
    let status = bin()
        .args(["export"])
        .arg(&scene)
        .args(["--view", "plane:0", "--p", "8", "--svg"])
        .arg(&plane)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(std::fs::read_to_string(&plane).unwrap().contains("<polyline"));

    // Plan overlay on the top view.
    let plan = dir.path().join("plan.json");
    let status = bin()
        .args(["plan"])
        .arg(&scene)
        .args(["--p", "4", "--q", "10", "--c", "8", "--out"])
        .arg(&plan)
        .status()
        .unwrap();
    assert!(status.success());
    let overlay = dir.path().join("overlay.svg");
    let status = bin()
        .args(["export"])
        .arg(&plan)
        .args(["--view", "top", "--svg"])
        .arg(&overlay)
        .arg("--scene")
        .arg(&scene)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(std::fs::read_to_string(&overlay).unwrap().contains("stroke-dasharray:1"));
}
