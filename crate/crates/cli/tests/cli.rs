use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(format!("{name}.json"))
}

fn adaptbai(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaptbai"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_bundled_files() {
    let h2 = data("h2");
    let h4 = data("h4");
    let out = adaptbai(&["validate", "--exact", h2.to_str().unwrap(), h4.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("ok ")).count(), 2);
}

#[test]
fn validate_rejects_corrupted_file() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(data("h2")).unwrap();
    std::fs::write(&bad, text.replacen("\"Z0\"", "\"Z9\"", 1)).unwrap();
    let out = adaptbai(&["validate", bad.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("pauli"));
}

#[test]
fn run_writes_trace_and_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("ledger.json");
    let out = adaptbai(&[
        "run",
        "--ham",
        data("h2").to_str().unwrap(),
        "--pool",
        "uccsd",
        "--policy",
        "se",
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
        "--ledger",
        ledger.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let trace = std::fs::read_to_string(dir.path().join("h2_uccsd_se_seed3.csv")).unwrap();
    assert!(trace.starts_with("# adaptbai-trace v1\n# meta {"));
    assert!(trace
        .lines()
        .any(|l| l == "iteration,cumulative_shots,energy,energy_error,chosen_label,survivors_json"));
    let ledger: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(ledger).unwrap()).unwrap();
    assert!(ledger["total_shots"].as_u64().unwrap() > 0);
    assert!(stdout(&out).contains("shots to chemical accuracy"));
}

#[test]
fn run_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let config = serde_json::json!({
        "hamiltonian_path": data("h2"),
        "pool": "qe",
        "policy": "naive",
        "epsilon": 1e-3,
        "seed": 1
    });
    std::fs::write(&cfg, config.to_string()).unwrap();
    let out = adaptbai(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(dir.path().join("h2_qe_naive_seed7.csv").exists());
}

#[test]
fn run_without_hamiltonian_fails() {
    let out = adaptbai(&["run", "--pool", "uccsd"]);
    assert!(!out.status.success());
}

#[test]
fn bench_then_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let out = adaptbai(&[
        "bench",
        "--ham",
        data("h2").to_str().unwrap(),
        "--pool",
        "uccsd",
        "--seed",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let csvs = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(csvs, 2);
    assert!(dir.path().join("summary.json").exists());
    assert!(dir.path().join("summary.txt").exists());

    let summary = dir.path().join("again.json");
    let out = adaptbai(&[
        "summarize",
        dir.path().to_str().unwrap(),
        "--out",
        summary.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("UCCSD"));
    let first = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
    let second = std::fs::read_to_string(summary).unwrap();
    assert_eq!(first, second);
}

#[test]
fn bench_reports_failed_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = adaptbai(&[
        "bench",
        "--ham",
        "/nonexistent/ham.json",
        "--pool",
        "uccsd",
        "--seed",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAILED"));
}
