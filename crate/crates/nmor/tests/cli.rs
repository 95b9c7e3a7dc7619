use std::path::Path;
use std::process::Command;

fn nmor(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nmor")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn bad_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out").display().to_string();
    for (name, text) in [
        ("unknown.toml", "[atom]\ngama_mhz = 3\n"),
        ("negative.toml", "[atom]\ngamma_mhz = -1\n"),
        ("conflict.toml", "[laser]\nrabi_mhz = 1\npower_mw = 1\n"),
        ("syntax.toml", "[atom\n"),
    ] {
        let cfg = write(dir.path(), name, text);
        let o = nmor(&["sweep", "--config", &cfg, "--out", &out]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = nmor(&["sweep", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn noiseless_trace_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "quiet.toml", "[laser]\nlinewidth_mhz = 0\n[trace]\nduration_us = 1.0\nwindow_us = 1.0\n");
    let out = dir.path().join("out");
    let o = nmor(&["trace", "--config", &cfg, "--out", &out.display().to_string()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("trace.csv").exists());
    assert!(!out.join("correlation.csv").exists());
}

#[test]
fn correlate_reads_external_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("t,S1,S2\n");
    for k in 0..2000 {
        let v = ((k * 7) % 13) as f64;
        text.push_str(&format!("{:e},{},{}\n", k as f64 * 1e-9, 1.0 + v, 3.0 - v));
    }
    let input = write(dir.path(), "ext.csv", &text);
    let out = dir.path().join("out");
    let o = nmor(&["correlate", &input, "--out", &out.display().to_string(), "--reference", "5", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cf = nmor::io::read_correlation_csv(&out.join("correlation.csv")).unwrap();
    assert!((cf.at(0.0).unwrap() + 1.0).abs() < 1e-12);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn validate_passes() {
    let o = nmor(&["validate", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}
