use std::path::Path;
use std::process::{Command, Output};

fn tune(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tune"))
        .args(args)
        .env_remove("TUNE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = "seed = 3\nm = 3\n[solver]\nbudget = { n_c = 6, n_p = 8 }\n";

#[test]
fn solve_writes_front_and_recommendation() {
    let dir = tempfile::tempdir().unwrap();
    let wl = write(dir.path(), "w.toml", SMALL);
    let out = dir.path().join("out.json");
    let o = tune(&["solve", "--workload", &wl, "--method", "HMOOC1", "--weights", "0.9,0.1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["method"], "HMOOC1");
    assert!(!v["front"].as_array().unwrap().is_empty());
    assert!(v["recommendation"]["objectives"].is_array());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let wl = write(dir.path(), "w.toml", SMALL);
    let out = dir.path().join("o.json");
    let out = out.to_str().unwrap();
    assert_eq!(tune(&["solve", "--workload", &wl, "--method", "NOPE", "--out", out]).status.code(), Some(2));
    assert_eq!(tune(&["solve", "--workload", &wl, "--weights", "0.7,0.7", "--out", out]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.toml", "m = 0\n");
    assert_eq!(tune(&["solve", "--workload", &bad, "--out", out]).status.code(), Some(2));
    assert_eq!(tune(&["solve", "--workload", "/missing.toml", "--out", out]).status.code(), Some(2));
    assert_eq!(tune(&["frobnicate"]).status.code(), Some(2));
    let cfg = write(dir.path(), "b.toml", "methods = [\"EVO\"]\n");
    assert_eq!(tune(&["bench", "--config", &cfg, "--out", dir.path().to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let wl = write(dir.path(), "w.toml", SMALL);
    let o = tune(&["solve", "--workload", &wl, "--out", "/nonexistent-dir/out.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.toml",
        "methods = [\"HMOOC1\", \"HMOOC3\", \"MO-WS\"]\nglobal_samples = 100\n[solver]\nbudget = { n_c = 6, n_p = 8 }\n[[instances]]\nseed = 1\nm = 3\n",
    );
    let out = dir.path().join("reports");
    let o = tune(&["bench", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn bench_honours_out_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.toml",
        "methods = [\"HMOOC3\"]\n[solver]\nbudget = { n_c = 4, n_p = 4 }\n[[instances]]\nm = 2\n",
    );
    let target = dir.path().join("override");
    let o = Command::new(env!("CARGO_BIN_EXE_tune"))
        .args(["bench", "--config", &cfg, "--out", dir.path().join("ignored").to_str().unwrap()])
        .env("TUNE_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(target.join("report.json").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn simulate_and_oracle_print_json() {
    let dir = tempfile::tempdir().unwrap();
    let wl = write(dir.path(), "w.toml", SMALL);
    let sc = write(dir.path(), "s.toml", "weights = [0.9, 0.1]\nmethod = \"HMOOC1\"\n[[overrides]]\nsubq = 1\nestimated_alpha = 1000.0\n");
    let o = tune(&["simulate", "--workload", &wl, "--scenario", &sc]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["adaptive"]["latency"].as_f64().unwrap() > 0.0);
    assert!(v["frozen"]["latency"].as_f64().unwrap() > 0.0);

    let small = write(dir.path(), "o.toml", "m = 2\n[solver]\nbudget = { n_c = 3, n_p = 4 }\n");
    let o = tune(&["oracle", "--workload", &small]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!v["front"].as_array().unwrap().is_empty());
}

#[test]
fn shipped_configs_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cfg = |n: &str| root.join(n).to_str().unwrap().to_string();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("front.json");
    let o = tune(&["solve", "--workload", &cfg("workload.toml"), "--method", "HMOOC2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = tune(&["simulate", "--workload", &cfg("workload.toml"), "--scenario", &cfg("scenario.toml")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = tune(&["oracle", "--workload", &cfg("oracle.toml")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bench = tune_core::harness::load_bench_config(&root.join("bench.toml")).unwrap();
    assert!(bench.validate().is_ok());
}
