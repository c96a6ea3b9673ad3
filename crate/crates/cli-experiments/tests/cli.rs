use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sclab-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn sclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sclab")).args(args).output().expect("sclab runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn presets_are_listed_and_valid() {
    let o = sclab(&["presets"]);
    assert!(o.status.success());
    for p in cli_experiments::PRESETS {
        assert!(stdout(&o).contains(p.name));
        p.config().unwrap_or_else(|e| panic!("{}: {e:#}", p.name));
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = scratch("determinism");
    for run in ["a", "b"] {
        let out = dir.join(run);
        let o = sclab(&["rays", "rays-support-3", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let o = sclab(&["simulate", "fig1-two-interface", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["rays.csv", "neumann.csv", "depth.svg", "energy.csv", "snapshots.csv"] {
        let a = fs::read(dir.join("a").join(file)).unwrap();
        let b = fs::read(dir.join("b").join(file)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{file} differs between runs");
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn constant_medium_control_stops_at_k_zero() {
    let dir = scratch("constant");
    let o = sclab(&["control", "constant", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("tail stabilized at k = 0"));
    let trace = fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2, "header plus one row");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn coarse_gap_configuration_flags_divergence() {
    let dir = scratch("gap");
    let text = cli_experiments::preset::find("gap-2d").unwrap().text.replace("cells = 144, 180", "cells = 72, 90").replace("k_max = 50", "k_max = 8");
    let conf = dir.join("gap-coarse.conf");
    fs::write(&conf, text).unwrap();
    let out = dir.join("out");
    let o = sclab(&["control", conf.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("DIVERGENCE FLAGGED"), "{}", stdout(&o));
    assert!(out.join("tail.svg").exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn glancing_source_reports_all_mass_cut() {
    let dir = scratch("glancing");
    let o = sclab(&["rays", "rays-glancing", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("all mass reported cut"), "{}", stdout(&o));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn empty_medium_gives_empty_marchenko_tails() {
    let dir = scratch("empty-tails");
    let o = sclab(&["marchenko", "constant", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("tails are empty"), "{}", stdout(&o));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = scratch("bad");
    // Θ reaches within 1 of the right edge at speed 1, but 2T = 4.
    let conf = dir.join("short.conf");
    fs::write(&conf, "dim = 1\ncells = 200\nlo = -5\nhi = 5.5\ntheta = -0.5, 4.5\nT = 2\n").unwrap();
    let o = sclab(&["simulate", conf.to_str().unwrap(), "--out", dir.join("o").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("2T"));

    let o = sclab(&["control", "no-such-preset"]);
    assert!(!o.status.success());

    let o = sclab(&["marchenko", "gap-2d", "--out", dir.join("m").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("one-dimensional"));

    let o = sclab(&["check", "11"]);
    assert!(!o.status.success());
    let _ = fs::remove_dir_all(&dir);
}
