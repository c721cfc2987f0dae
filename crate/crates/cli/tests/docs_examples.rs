//! The JSON documents shipped under docs/examples must stay loadable and
//! meaningful; this keeps them from rotting as the formats evolve.

use std::path::PathBuf;
use std::process::Command;

fn example(name: &str) -> String {
    let path: PathBuf =
        [env!("CARGO_MANIFEST_DIR"), "..", "..", "docs", "examples", name].iter().collect();
    path.to_str().unwrap().to_owned()
}

fn run_ok(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_echospike"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn shipped_scripts_drive_a_scenario_run() {
    for name in ["appear-25cm.json", "ramp-out-and-back.json", "step-closer.json"] {
        let dir = tempfile::tempdir().unwrap();
        run_ok(&[
            "scenario",
            "run",
            "--script",
            &example(name),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(dir.path().join("run.csv").exists(), "{name} produced no report");
    }
}

#[test]
fn shipped_arena_drives_a_world_run() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "scenario",
        "world",
        "--world",
        &example("boxed-arena.json"),
        "--duration-ms",
        "1500",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(dir.path().join("trajectory.csv").exists());
}

#[test]
fn shipped_scripts_match_the_library_defaults() {
    // The arena document must describe the same world the library builds.
    let text = std::fs::read_to_string(example("boxed-arena.json")).unwrap();
    let parsed: echospike::world::WorldModel = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, echospike::world::WorldModel::boxed_arena());
}
