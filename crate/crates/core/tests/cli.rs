//! End-to-end runs of the command-line subcommands.

use std::fs;
use std::path::Path;

use crossdiff::cli::{main_with_args, EXIT_DEGENERATE, EXIT_IO, EXIT_OK, EXIT_UNSTABLE};
use crossdiff::pgm::{read_pgm, write_pgm, GrayImage};

fn cli(args: &[&str]) -> i32 {
    let mut full = vec!["crossdiff"];
    full.extend_from_slice(args);
    main_with_args(full)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_filter_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("disk.pgm");
    assert_eq!(cli(&["gen-test-image", "--kind", "disk", "--width", "24", "--height", "20", "--out", s(&img)]), EXIT_OK);
    let read = read_pgm(&img).unwrap();
    assert_eq!((read.width, read.height), (24, 20));

    let prefix = dir.path().join("out/run");
    let code = cli(&[
        "filter", "--input", s(&img), "--preset", "ncdf2", "--steps", "10", "--snapshots", "0.25,0.5",
        "--out-prefix", s(&prefix),
    ]);
    assert_eq!(code, EXIT_OK);
    let out = dir.path().join("out");
    for name in ["run_u_t0.250.pgm", "run_v_t0.250.pgm", "run_u_t0.500.pgm", "run_v_t0.500.pgm", "run_v_t0.500.pgm.txt"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let monitor = fs::read_to_string(out.join("run_monitor.csv")).unwrap();
    assert_eq!(monitor.lines().count(), 1 + 11);

    let filtered = out.join("run_u_t0.500.pgm");
    assert_eq!(cli(&["metrics", "--reference", s(&img), "--test", s(&filtered)]), EXIT_OK);
}

#[test]
fn metrics_rejects_flat_reference_and_mismatched_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.pgm");
    write_pgm(&flat, &GrayImage { width: 4, height: 4, pixels: vec![7; 16] }).unwrap();
    let other = dir.path().join("other.pgm");
    write_pgm(&other, &GrayImage { width: 4, height: 4, pixels: (0..16).collect() }).unwrap();
    let small = dir.path().join("small.pgm");
    write_pgm(&small, &GrayImage { width: 3, height: 3, pixels: (0..9).collect() }).unwrap();
    assert_eq!(cli(&["metrics", "--reference", s(&flat), "--test", s(&other)]), EXIT_DEGENERATE);
    assert_eq!(cli(&["metrics", "--reference", s(&other), "--test", s(&small)]), EXIT_IO);
    assert_eq!(cli(&["metrics", "--reference", s(&dir.path().join("none.pgm")), "--test", s(&other)]), EXIT_IO);
}

#[test]
fn unstable_filter_reports_divergence_and_keeps_log() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("blow");
    let code = cli(&[
        "filter", "--synthetic", "checkerboard", "--matrix", "1,0,0,1", "--dt", "5", "--steps", "500",
        "--out-prefix", s(&prefix),
    ]);
    assert_eq!(code, EXIT_UNSTABLE);
    let log = fs::read_to_string(dir.path().join("blow_monitor.csv")).unwrap();
    assert!(log.lines().count() > 2);
}

#[test]
fn experiment_writes_curves_summary_and_properties() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("exp");
    let config = dir.path().join("exp.toml");
    fs::write(&config, "steps = 8\npresets = [\"ncdf2\", \"rotation:0.1\"]\nproperty_steps = 5\n").unwrap();
    let code = cli(&["experiment", "--config", s(&config), "--properties", "--out-prefix", s(&prefix)]);
    assert_eq!(code, EXIT_OK);
    let curve = fs::read_to_string(dir.path().join("exp_ncdf2_metrics.csv")).unwrap();
    assert_eq!(curve.lines().count(), 1 + 9);
    assert!(dir.path().join("exp_rotation_0.1_metrics.csv").exists());
    let summary = fs::read_to_string(dir.path().join("exp_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    let props = fs::read_to_string(dir.path().join("exp_properties.csv")).unwrap();
    assert!(props.starts_with("label,kind,deviation,threshold,pass"));
}

#[test]
fn properties_subcommand_passes_on_default_presets() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("small.pgm");
    assert_eq!(cli(&["gen-test-image", "--kind", "shapes", "--width", "16", "--height", "16", "--out", s(&img)]), EXIT_OK);
    let prefix = dir.path().join("p");
    let code = cli(&["properties", "--input", s(&img), "--property-steps", "10", "--out-prefix", s(&prefix)]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn usage_errors() {
    assert_eq!(cli(&["filter", "--preset", "ncdf7"]), EXIT_IO);
    assert_eq!(cli(&["filter", "--no-such-flag"]), EXIT_IO);
    assert_eq!(cli(&["gen-test-image", "--kind", "mandrill", "--out", "/tmp/x.pgm"]), EXIT_IO);
}
