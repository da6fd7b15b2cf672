//! Every example runs to completion. `cargo test` builds the example
//! binaries next to the test harness, so they are run from there.

use std::path::PathBuf;
use std::process::Command;

fn example_bin(name: &str) -> PathBuf {
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    deps.parent().unwrap().join("examples").join(name).with_extension(std::env::consts::EXE_EXTENSION)
}

fn run(name: &str) {
    let bin = example_bin(name);
    assert!(bin.exists(), "{} was not built", bin.display());
    let out = Command::new(&bin).env("RUST_LOG", "warn").output().unwrap();
    assert!(
        out.status.success(),
        "{name} failed\n{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn scene_generation() {
    run("scene_generation");
}

#[test]
fn headless_teleop() {
    run("headless_teleop");
}

#[test]
fn replay_check() {
    run("replay_check");
}

#[test]
fn mirror_augmentation() {
    run("mirror_augmentation");
}

#[test]
fn graph_dataset() {
    run("graph_dataset");
}

#[test]
fn compliance() {
    run("compliance");
}

#[test]
fn topic_bus() {
    run("topic_bus");
}

#[test]
fn gateway_server() {
    run("gateway_server");
}
