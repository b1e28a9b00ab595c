use std::process::Command;

fn kcut(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_kcut")).args(args).env_remove("KCUT_THREADS").output().unwrap()
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn constants_print_rationals() {
    let o = kcut(&["constants", "--k", "2", "--r", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["C5"][0]["value"], "1/3");
    assert_eq!(v["k"], 2);
}

#[test]
fn exact_mean_and_comparison() {
    let o = kcut(&["exact-mean", "--n", "7", "--k", "1", "--r", "1"]);
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 10.0 / 3.0).abs() < 1e-12);
    let o = kcut(&["exact-mean", "--n", "7", "--k", "1", "--r", "1", "--edge"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 4.0).abs() < 1e-12);
    let o = kcut(&["exact-mean", "--n", "1024", "--k", "2", "--r", "1", "--compare-asymptotic"]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("relative_gap ")));
}

#[test]
fn simulate_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = ["simulate", "--n", "200", "--k", "3", "--samples", "50", "--seed", "4"];
    let o1 = kcut(&[&base[..], &["--threads", "1", "--out", a.to_str().unwrap()]].concat());
    let o2 = Command::new(env!("CARGO_BIN_EXE_kcut"))
        .args([&base[..], &["--out", b.to_str().unwrap()]].concat())
        .env("KCUT_THREADS", "4")
        .output()
        .unwrap();
    assert!(o1.status.success() && o2.status.success());
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("sample_index,r,count\n"));
    assert_eq!(text.lines().count(), 1 + 50 * 4);
}

#[test]
fn limit_grid_output() {
    let o = kcut(&["limit", "--r", "1", "--k", "1", "--gamma", "0.3", "--density", "--grid", "1:2:4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "x,density");
    assert_eq!(rows.len(), 6);
    // k = 1: density is 2^{frac(lg x + γ)} / x²
    let v: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - 0.3f64.exp2()).abs() < 1e-12);
}

#[test]
fn experiment_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rep.csv");
    let json = dir.path().join("rep.json");
    let cfg = dir.path().join("cfg.json");
    let body = serde_json::json!({
        "k": 1, "r": 1, "gamma_target": 0.4, "n_min": 64, "n_max": 600, "count": 2,
        "samples": 40, "seed": 3,
        "output": {"csv": csv, "json": json}
    });
    std::fs::write(&cfg, body.to_string()).unwrap();
    let o = kcut(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("n,gamma,within_delta,"));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(rep["sizes"].as_array().unwrap().len(), table.lines().count() - 1);
}

#[test]
fn exit_codes() {
    assert_eq!(kcut(&["exact-mean", "--n", "7", "--k", "1", "--r", "2"]).status.code(), Some(2));
    assert_eq!(kcut(&["limit", "--r", "1", "--k", "1", "--gamma", "0.3", "--cdf", "--grid", "nonsense"]).status.code(), Some(2));
    assert_eq!(kcut(&["constants", "--k", "40", "--r", "1"]).status.code(), Some(2));
    assert_eq!(kcut(&["experiment", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
    let bad_env = Command::new(env!("CARGO_BIN_EXE_kcut")).args(["constants", "--k", "1", "--r", "1"]).env("KCUT_THREADS", "zero").output().unwrap();
    assert_eq!(bad_env.status.code(), Some(2));
}
