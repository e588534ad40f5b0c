use std::process::Command;

fn qbench(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qbench")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn run_then_verify_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    let run = run.to_str().unwrap();
    let (code, out, _) = qbench(&["run", "--min_qubits", "3", "--max_qubits", "5", "--num_shots", "200", "--output_dir", run]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 3);

    let (code, out, _) = qbench(&["verify", run]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.contains("FAIL"));

    let rep = tmp.path().join("rep");
    let (code, _, _) = qbench(&["report", run, "--compare", run, "--output_dir", rep.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(rep.join("fidelity.svg").exists());
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "benchmark = \"qpe\"\nmin_qubits = 2\nmax_qubits = 9\nnum_shots = 100\n").unwrap();
    let out = tmp.path().join("o");
    let (code, stdout, _) = qbench(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--max_qubits",
        "3",
        "--dynamic",
        "--output_dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let m = qbench_cli::load_manifest(&out).unwrap();
    assert_eq!(m.config.max_qubits, 3);
    assert!(m.config.dynamic);
    assert_eq!(m.records.len(), 2, "{stdout}");
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(qbench(&["run", "--min_qubits", "6", "--max_qubits", "4"]).0, 2);
    assert_eq!(qbench(&["run", "--no_such_flag"]).0, 2);
    assert_eq!(qbench(&["run", "--transport", "carrier-pigeon"]).0, 2);
    assert_eq!(qbench(&["qrl-train", "--preset", "fast"]).0, 2);
    assert_eq!(qbench(&["qrl-train", "--batch_size", "0"]).0, 2);
    assert_eq!(qbench(&["report", "/nonexistent/run"]).0, 1);
    assert_eq!(qbench(&["--help"]).0, 0);
}

#[test]
fn qrl_train_writes_logs() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, out, _) = qbench(&[
        "qrl-train",
        "--optimizer",
        "spsa",
        "--total_steps",
        "120",
        "--output_dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("spsa loss evaluations"));
    let steps = std::fs::read_to_string(tmp.path().join("qrl_steps.jsonl")).unwrap();
    assert_eq!(steps.lines().count(), 120);
    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("qrl_stats.json")).unwrap()).unwrap();
    assert_eq!(stats["total_steps"], 120);
    assert_eq!(stats["loss_evaluations"], 4);
}
