//! End-to-end tests of the `rotolab` binary: exit codes, output files, and
//! the reproducibility contract, driven through the real argument parser.

use std::fs;
use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_rotolab");

const DEMO_PROBLEM: &str = "\
qubits = 1

[gates]
rx q=0 p=0

[observable]
1.0 Z
";

fn write_demo(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let problem = dir.join("problem.txt");
    fs::write(&problem, DEMO_PROBLEM).unwrap();
    let config = dir.join("config.toml");
    fs::write(
        &config,
        format!(
            "[problem]\nfile = \"{}\"\ntheta0 = [0.9]\n\n[oracle]\nmode = \"gaussian\"\nsigma = 0.1\n\n[verify]\nchecks = [\"descent\"]\nseeds = 120\niterations = 40\n",
            problem.display()
        ),
    )
    .unwrap();
    (problem, config)
}

#[test]
fn fit_prints_table_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (problem, _) = write_demo(dir.path());
    let config = dir.path().join("fit.toml");
    fs::write(&config, format!("[problem]\nfile = \"{}\"\n", problem.display())).unwrap();
    let out = Command::new(BIN)
        .args(["fit", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("j,amplitude,"));
    assert!(stdout.lines().count() == 2);
}

#[test]
fn fit_bad_config_exits_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("broken.toml");
    fs::write(&config, "[problem]\nfile = \"/nonexistent/problem.txt\"\n").unwrap();
    let out = Command::new(BIN)
        .args(["fit", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn optimize_writes_traces_and_respects_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let (problem, _) = write_demo(dir.path());
    let config = dir.path().join("opt.toml");
    fs::write(
        &config,
        format!(
            "[problem]\nfile = \"{}\"\n[optim]\noptimizers = [\"rotosolve\"]\niterations = 3\nseeds = [0]\n",
            problem.display()
        ),
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = Command::new(BIN)
        .args(["optimize", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(&out_dir)
        .args(["--seeds", "4,5"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("trace_rotosolve_4.csv").exists());
    assert!(out_dir.join("trace_rotosolve_5.csv").exists());
    assert!(!out_dir.join("trace_rotosolve_0.csv").exists());
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("optimizer,t,mean_f,std_f,mean_executions\n"));
}

#[test]
fn verify_passes_then_negative_control_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (_, config) = write_demo(dir.path());
    let out = Command::new(BIN)
        .args(["verify", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "verify failed: {}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("[PASS]"));

    let control = Command::new(BIN)
        .args(["verify", "--negative-control", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(control.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&control.stdout).contains("[FAIL]"));
}

#[test]
fn dataset_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bench.toml");
    fs::write(&config, "[problem]\nbenchmark = true\nk = 6\n").unwrap();
    let out = Command::new(BIN)
        .args(["dataset", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("x1,x2,y\n"));
    assert_eq!(stdout.lines().count(), 7);
}
