use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_d2dcfl"))
}

#[test]
fn run_writes_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "iterations = 5\n").unwrap();
    let out = dir.path().join("out.csv");
    let status = bin()
        .args(["run", "--config", cfg.to_str().unwrap(), "--seed", "7", "--mode", "d2dcfl", "--omega-policy", "fixed=0.5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("# seed=7") && text.contains("# omega_policy=fixed=0.5"));
    assert_eq!(text.lines().filter(|l| l.starts_with("d2dcfl,7,")).count(), 5);
}

#[test]
fn sweep_and_predict_print_csv() {
    let out = bin().args(["sweep", "--replications", "1", "--rhos", "0.2,1.0", "--dataset", "synthetic"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);

    let out = bin().args(["predict", "--points", "4"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("time_s,baseline_error,d2dcfl_error"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn bad_input_is_reported() {
    let out = bin().args(["run", "--omega-policy", "sometimes"]).output().unwrap();
    assert!(!out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "userz = 3\n").unwrap();
    let out = bin().args(["run", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("userz"));
}
