use std::path::PathBuf;
use std::process::Command;

fn scratch(name: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("rfim-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&p);
    std::fs::create_dir_all(&p).unwrap();
    p
}

fn rfim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rfim")).args(args).output().unwrap()
}

#[test]
fn config_file_and_flags() {
    let dir = scratch("config");
    let cfg = dir.join("oracle.cfg");
    std::fs::write(&cfg, "# small suite\nexperiment = oracle-verify\ninstances = 1, 2, 2x1\ndraws = 2\nseed = 5\n").unwrap();
    let out = dir.join("out");
    let o = rfim(&["oracle-verify", "--config", cfg.to_str().unwrap(), "--seed", "9", "--out", out.to_str().unwrap(), "--threads", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("oracle_verify.csv")).unwrap();
    assert!(csv.starts_with("# schema_version=1\ncheck,instance,draw,value,bound,slack,passed\n"));
    assert!(csv.lines().skip(2).all(|l| l.ends_with(",true")));
    let record: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("oracle-verify.record.json")).unwrap()).unwrap();
    assert_eq!(record["schema_version"], 1);
    assert_eq!(record["config"]["seed"], 9);
    assert_eq!(record["config"]["draws"], 2);
    assert_eq!(record["passed"], true);
    // the recorded text reproduces the run
    let text = record["config_text"].as_str().unwrap();
    let again = rfim::harness::ExperimentConfig::parse(text, None).unwrap();
    assert_eq!(format!("{:016x}", again.hash()), record["config_hash"].as_str().unwrap());
}

#[test]
fn failing_checks_exit_nonzero() {
    let dir = scratch("corrupt");
    let o = rfim(&["oracle-verify", "--out", dir.to_str().unwrap(), "--set", "instances=2", "--set", "draws=1", "--set", "corrupt_weight=true"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn bad_input_is_an_error() {
    let dir = scratch("bad");
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "beta = 0.3\nwidgets = 4\n").unwrap();
    let o = rfim(&["decay-fit", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = rfim(&["oracle-verify", "--out", dir.to_str().unwrap(), "--cap", "8"]);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(&cfg, "experiment = mixing-tv\n").unwrap();
    let o = rfim(&["decay-fit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_coupling_gives_all_zero_fit() {
    let dir = scratch("zero");
    let o = rfim(&[
        "decay-fit", "--out", dir.to_str().unwrap(), "--set", "beta=0", "--set", "sizes=20", "--set", "distances=2,4,8",
        "--set", "samples=50",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit = std::fs::read_to_string(dir.join("decay_fit.csv")).unwrap();
    assert!(fit.lines().nth(2).unwrap().starts_with("all-zero,"));
}

#[test]
fn threshold_table_rows() {
    let dir = scratch("table");
    let o = rfim(&["threshold-table", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.join("threshold_table.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 11);
    let h2: f64 = rows[0].split(',').nth(1).unwrap().parse().unwrap();
    assert!((h2 - 0.28370).abs() < 5e-5);
}
