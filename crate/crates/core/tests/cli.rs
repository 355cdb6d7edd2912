use std::path::Path;
use std::process::{Command, Output};

fn evcharge(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evcharge"))
        .args(args)
        .env("EVCHARGE_OUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn eval_writes_to_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        evcharge(&["eval", "--lambda", "10", "--K", "10", "--M", "5", "--methods", "fluid_modified,exact"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("eval.csv"));
    assert_eq!(header, ["method", "E_Z", "E_Q", "P_s", "RE_E_Z_pct", "RE_P_s_pct", "error"]);
    let fluid = rows.iter().find(|r| r[0] == "fluid_modified").unwrap();
    assert!(!fluid[4].is_empty() && fluid[6].is_empty());
}

#[test]
fn eval_from_config_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.json");
    let target = dir.path().join("nested").join("result.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "params": {"lambda": 1.0, "mu": 1.0, "nu": 1.0, "k": 1, "m": 1.0},
            "methods": ["exact"],
            "output": {"path": target, "format": "json"}
        })
        .to_string(),
    )
    .unwrap();
    let out = evcharge(&["eval", "--config", cfg.to_str().unwrap(), "--lambda", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    // lambda = 2 on the one-space lot: E[Q] = 2/3, P_s = 1/2
    let e_q = rows[0]["e_q"].as_f64().unwrap();
    assert!((e_q - 2.0 / 3.0).abs() < 1e-12);
    assert!((rows[0]["p_success"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn invalid_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = evcharge(&["eval", "--lambda", "-1", "--K", "3", "--M", "1", "--methods", "exact"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = evcharge(&["eval", "--lambda", "1", "--K", "3", "--M", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2), "no methods selected");
    let out = evcharge(&["eval", "--lambda", "1", "--K", "3", "--M", "4", "--methods", "exact"], dir.path());
    assert_eq!(out.status.code(), Some(2), "M > K");
    let out = evcharge(&["converge", "--scaling", "warp", "--lambda", "1", "--K", "1", "--M", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table_one_first_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = evcharge(&["tables", "--id", "1"], dir.path());
    assert!(out.status.success());
    let (header, rows) = read_csv(&dir.path().join("table1.csv"));
    assert_eq!(header, ["table", "lambda_mult", "K", "max_rel_error_pct", "argmax_M"]);
    assert_eq!(rows.len(), 10);
    let v: f64 = rows[0][3].parse().unwrap();
    assert!((v - 39.6569).abs() < 0.02);
}

#[test]
fn sweep_writes_explicit_path() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("s.csv");
    let out = evcharge(&["sweep", "--K", "10", "--lambda-mult", "1.2", "--out", target.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&target);
    assert_eq!(header[0], "M");
    assert_eq!(rows.len(), 10);
    for r in &rows {
        let exact: f64 = r[2].parse().unwrap();
        let lower: f64 = r[4].parse().unwrap();
        assert!(lower <= exact + 1e-9 && exact <= 0.5 + 1e-9);
    }
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--lambda",
        "1",
        "--K",
        "1",
        "--M",
        "1",
        "--horizon",
        "200",
        "--burn-in",
        "10",
        "--reps",
        "4",
        "--seed",
        "5",
        "--format",
        "json",
    ];
    let a = evcharge(&args, dir.path());
    let first = std::fs::read(dir.path().join("simulate.json")).unwrap();
    let b = evcharge(&args, dir.path());
    let second = std::fs::read(dir.path().join("simulate.json")).unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(first, second);
}

#[test]
fn converge_fluid_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = evcharge(
        &[
            "converge",
            "--scaling",
            "fluid",
            "--n",
            "5,20",
            "--z0",
            "0.5",
            "--lambda",
            "1.2",
            "--K",
            "1",
            "--M",
            "0.5",
            "--horizon",
            "10",
            "--burn-in",
            "0",
            "--reps",
            "10",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("converge.csv"));
    assert_eq!(header, ["n", "statistic", "limit", "error"]);
    assert_eq!(rows.len(), 2);
}
