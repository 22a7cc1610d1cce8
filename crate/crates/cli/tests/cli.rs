use std::path::Path;
use std::process::{Command, Output};

use pdlsim::{ExperimentKind, ExperimentSpec};

fn pdlsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdlsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_spec(dir: &Path) -> String {
    let mut spec = ExperimentSpec::desk(ExperimentKind::Single);
    spec.frames_per_burst = 1;
    let path = dir.join("spec.json");
    std::fs::write(&path, spec.to_json().unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn dump_constellation_to_stdout() {
    let out = pdlsim(&["dump-constellation"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,real,imag,bits");
    assert_eq!(lines.len(), 17);
    // 9 significant digits.
    let re = lines[1].split(',').nth(1).unwrap();
    assert_eq!(
        re.trim_start_matches('-')
            .replace('.', "")
            .trim_start_matches('0')
            .len(),
        9,
        "{re}"
    );
}

#[test]
fn dump_constellation_to_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = pdlsim(&["dump-constellation", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("constellation.csv")).unwrap();
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec::desk(ExperimentKind::Single);
    let mut doc: serde_json::Value = serde_json::from_str(&spec.to_json().unwrap()).unwrap();
    doc["launch_power"] = serde_json::json!(3.0);
    let path = dir.path().join("bad.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = pdlsim(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("launch_power"));
}

#[test]
fn invalid_override_is_a_config_error() {
    let out = pdlsim(&["run", "--desk-scale", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_flag_is_a_usage_error() {
    assert_eq!(pdlsim(&["run", "--plots", "maybe"]).status.code(), Some(2));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = pdlsim(&["run", "--config", "/nonexistent/spec.json"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn run_writes_reports_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path());
    let mut csvs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "2")] {
        let out_dir = dir.path().join(name);
        let out = pdlsim(&[
            "run",
            "--config",
            &spec,
            "--seed",
            "5",
            "--plots",
            "off",
            "--threads",
            threads,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out_dir.join("report.json").exists());
        csvs.push(std::fs::read(out_dir.join("samples.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    assert!(text.starts_with("seed,config_hash,ber,bit_count,q_db,cumulated_pdl_db"));
}
