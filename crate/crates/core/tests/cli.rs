use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_iwacoinv"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("iwacoinv_cli_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().unwrap();
    (
        status.code().unwrap(),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

const SMALL: &str =
    "modules = 2\nshapiro_modules = 1\nproduct_modules = 1\nextra_prop_single = []\n";

#[test]
fn verify_passes_at_three_and_is_reproducible() {
    let cfg = tmp("three.toml");
    std::fs::write(&cfg, format!("primes = [3]\nn_max = 3\n{SMALL}")).unwrap();
    let (code, a, _) = run(bin().arg("--config").arg(&cfg).arg("verify"));
    assert_eq!(code, 0);
    let (_, b, _) = run(bin().arg("--config").arg(&cfg).arg("verify"));
    assert_eq!(a, b);
    let first: serde_json::Value = serde_json::from_str(a.lines().next().unwrap()).unwrap();
    assert_eq!(first["config"]["seed"], 0);
    for line in a.lines().skip(1) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_ne!(v["status"], "fail", "{line}");
    }
    // flag overrides the file
    let (code, c, _) = run(bin()
        .arg("--config")
        .arg(&cfg)
        .args(["--seed", "5", "verify"]));
    assert_eq!(code, 0);
    assert!(c.starts_with("{\"config\"") && c.contains("\"seed\":5"));
    assert_ne!(a, c);
}

#[test]
fn verify_exits_one_on_failed_check() {
    let cfg = tmp("two.toml");
    std::fs::write(&cfg, "primes = [2]\nmodules = 0\nshapiro_modules = 0\nproduct_modules = 0\nextra_prop_single = []\ncopies = [1]\n").unwrap();
    let out = tmp("two.jsonl");
    let (code, stdout, _) = run(bin()
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .arg("verify"));
    assert_eq!(code, 1);
    assert!(stdout.is_empty());
    let report = std::fs::read_to_string(&out).unwrap();
    assert!(
        report
            .lines()
            .any(|l| l.contains("\"check\":\"product_identity\"")
                && l.contains("\"status\":\"fail\""))
    );
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(run(bin().args(["--p", "4", "verify"])).0, 2);
    assert_eq!(run(bin().args(["--dim-cap", "0", "sweep"])).0, 2);
    assert_eq!(
        run(bin().args(["--config", "/nonexistent/cfg.toml", "verify"])).0,
        2
    );
    let bad = tmp("bad.toml");
    std::fs::write(&bad, "unknown_key = 3\n").unwrap();
    assert_eq!(run(bin().arg("--config").arg(&bad).arg("verify")).0, 2);
    let (code, _, err) = run(bin().args(["delta", "1"]));
    assert_eq!(code, 2);
    assert!(err.contains("no primes"));
    assert_eq!(
        run(bin().args(["delta", "10"]).env("IWACOINV_WORKERS", "0")).0,
        2
    );
    assert_eq!(run(bin().args(["--p", "2,3", "decompose", "3", "3"])).0, 2);
    // base p^4 needs 4 | k - 1
    assert_eq!(run(bin().args(["--p", "3", "decompose", "3", "3"])).0, 2);
}

#[test]
fn delta_table() {
    let (code, out, _) = run(bin().args(["delta", "2"]));
    assert_eq!(code, 0);
    assert!(out.lines().nth(1).unwrap().contains("0.2075187496"));
    let (_, csv, _) = run(bin().args(["--format", "csv", "delta", "100"]));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p,delta,minimum"));
    assert_eq!(lines.clone().count(), 25);
    assert_eq!(lines.filter(|l| l.ends_with("true")).count(), 1);
}

#[test]
fn sweep_and_decompose() {
    let (code, out, _) = run(bin()
        .args(["--p", "3", "--n-max", "3", "--t", "1", "--seed", "9"])
        .env("IWACOINV_WORKERS", "2")
        .arg("sweep"));
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("table,p,N,t,module,seed,subgroup,dim,bound,ratio,base_seed")
    );
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().all(|r| r.ends_with(",9")));
    for table in ["decay_G", "decay_T", "decay_Tlj", "harris"] {
        assert!(rows.iter().any(|r| r.starts_with(table)), "{table}");
    }
    let (code, json, _) =
        run(bin().args(["--p", "2", "--relaxed-decompose", "decompose", "17", "9"]));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let levels: Vec<u64> = v["steps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["quotient_level"].as_u64().unwrap())
        .collect();
    assert_eq!((levels, v["base"].as_u64()), (vec![5, 1], Some(2)));
    let (code, json, _) = run(bin().args(["--p", "2", "decompose", "17", "9"]));
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let levels: Vec<u64> = v["steps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["quotient_level"].as_u64().unwrap())
        .collect();
    assert_eq!(levels, vec![5, 1]);
}
