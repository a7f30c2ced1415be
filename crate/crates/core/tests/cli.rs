use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ptwell"))
}

fn potential(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../potentials").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn spec_arg(name: &str) -> String {
    potential(name).to_string_lossy().into_owned()
}

#[test]
fn spectrum_lists_harmonic_levels() {
    let spec = spec_arg("harmonic.json");
    let out = run(&["spectrum", "--spec", &spec, "--h", "0.1", "--window", "0.05", "0.55"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("k,e_bs_re,e_bs_im"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0] as usize, k);
        assert!((row[1] - (2 * k + 1) as f64 * 0.1).abs() < 1e-12);
        assert!((row[3] - row[1]).abs() < 1e-6);
    }
}

#[test]
fn certify_reports_a_match() {
    let spec = spec_arg("harmonic.json");
    let out = run(&["certify", "--spec", &spec, "--h", "0.1", "--rect", "0.05", "0.55", "-0.1", "0.1", "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["match"], true);
    assert_eq!(v["zero_count"], 3);
}

#[test]
fn double_well_is_rejected_with_hypothesis_code() {
    let spec = spec_arg("double_well.json");
    let out = run(&["spectrum", "--spec", &spec, "--h", "0.1", "--window", "0.05", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SingleWellViolation"));
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(run(&["spectrum", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_spec_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"v0\": 3}").unwrap();
    let out = run(&["action", "--spec", path.to_str().unwrap(), "--energy", "1", "0"]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SpecFormat"));
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let spec = spec_arg("anharmonic.json");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("action.csv");
    let args = ["action", "--spec", &spec, "--energy", "1", "0", "--eps", "0.1"];
    let stdout = run(&args).stdout;
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    assert_eq!(run(&with_out).status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
}

#[test]
fn outputs_are_deterministic_across_thread_counts() {
    let spec = spec_arg("anharmonic.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["spectrum", "--spec", &spec, "--h", "0.1", "--window", "0.05", "0.8", "--eps", "0.1"],
        vec!["action", "--spec", &spec, "--window", "0.8", "1.2", "--points", "5", "--eps", "0.2"],
        vec!["stokes", "--spec", &spec, "--energy", "1", "0.05", "--rect", "-3", "3", "-3", "3", "--eps", "0.1"],
        vec!["certify", "--spec", &spec, "--h", "0.1", "--rect", "0.05", "0.5", "-0.1", "0.1"],
    ];
    for args in cases {
        let first = run(&args);
        let second = run(&args);
        let single = bin().args(&args).env("PTWELL_THREADS", "1").output().unwrap();
        assert_eq!(first.status.code(), Some(0), "{args:?}");
        assert_eq!(first.stdout, second.stdout, "{args:?}");
        assert_eq!(first.stdout, single.stdout, "{args:?}");
    }
}

#[test]
fn stokes_output_is_json_with_lines() {
    let spec = spec_arg("harmonic.json");
    let out = run(&["stokes", "--spec", &spec, "--energy", "1", "0.05", "--rect", "-3", "3", "-3", "3", "--anti"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["lines"].as_array().unwrap().len(), 12);
}

#[test]
fn coarse_wkb_grid_is_refused() {
    let spec = spec_arg("harmonic.json");
    let out = run(&["wkb", "--spec", &spec, "--energy", "1", "0", "--points", "11"]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("GridTooCoarse"));
}

#[test]
fn wkb_output_has_residual_header() {
    let spec = spec_arg("harmonic.json");
    let out = run(&["wkb", "--spec", &spec, "--energy", "1", "0", "--window", "1.5", "6", "--points", "2001"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# tail_estimate")));
    assert!(text.lines().any(|l| l.starts_with("# residual_order")));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("x,a0_re,a0_im"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 2002);
}
