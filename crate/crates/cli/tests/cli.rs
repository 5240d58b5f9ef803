use std::process::{Command, Output};

use divlab::window::count_window;
use divlab::WindowQuery;
use serde_json::Value;

fn divlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_divlab"))
        .args(args)
        .env_remove("DIVLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_prints_plain_value() {
    let o = divlab(&["count", "--x", "100", "--y", "3", "--z", "6"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "46\n");
}

#[test]
fn count_accepts_scientific_notation() {
    let a = divlab(&["count", "--x", "1e4", "--y", "10", "--z", "20"]);
    let b = divlab(&["count", "--x", "10000", "--y", "10", "--z", "20"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn count_json_has_metadata() {
    let o = divlab(&["count", "--x", "100", "--y", "3", "--z", "6", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["version"], "v1");
    assert_eq!(v["command"], "count");
    assert_eq!(v["seed"], 0xD1F1_50E5u64);
    assert_eq!(v["h"], 46);
}

#[test]
fn sweep_rows_recheck_against_library() {
    let o = divlab(&["sweep", "--x", "1e5", "--y-geom", "4:300:6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,h,rho"));
    let mut n = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let x: u64 = cells[0].parse().unwrap();
        let y: f64 = cells[1].parse().unwrap();
        let h: u64 = cells[2].parse().unwrap();
        assert_eq!(h, count_window(&WindowQuery::new(x, y, 2.0 * y).unwrap()).unwrap());
        assert_eq!(cells[3].is_empty(), y <= std::f64::consts::E.exp());
        n += 1;
    }
    assert_eq!(n, 6);
}

#[test]
fn identities_all_equal() {
    let o = divlab(&["identities", "--kmax", "6"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["equal"] == true));
    assert_eq!(v["failed"], 0);
}

#[test]
fn multtable_small_x_has_no_sandwich() {
    let o = divlab(&["multtable", "--x", "9", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["a"], 6);
    assert!(v["lower"].is_null());
}

#[test]
fn orderstats_reproducible_across_threads() {
    let args = ["orderstats", "--k", "20", "--u", "3", "--v", "25", "--samples", "50000", "--chunk", "4096"];
    let one = divlab(&[&args[..], &["--threads", "1"]].concat());
    let three = divlab(&[&args[..], &["--threads", "3"]].concat());
    let again = divlab(&[&args[..], &["--threads", "1"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(one.stdout, again.stdout);
    let v: Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(v["samples"], 50000);
    assert!(v["q_exact"].as_f64().unwrap() > 0.0);
}

#[test]
fn seed_changes_estimate() {
    let base = ["orderstats", "--k", "5", "--u", "1", "--v", "6", "--samples", "5000"];
    let a = divlab(&[&base[..], &["--seed", "1"]].concat());
    let b = divlab(&[&base[..], &["--seed", "0x2"]].concat());
    let qa: Value = serde_json::from_slice(&a.stdout).unwrap();
    let qb: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(qa["q_exact"], qb["q_exact"]);
    assert_ne!(qa["q_mc"], qb["q_mc"]);
    assert_eq!(qb["seed"], 2);
}

#[test]
fn threads_env_is_honoured() {
    let o = Command::new(env!("CARGO_BIN_EXE_divlab"))
        .args(["count", "--x", "100", "--y", "3", "--z", "6"])
        .env("DIVLAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_divlab"))
        .args(["count", "--x", "100", "--y", "3", "--z", "6"])
        .env("DIVLAB_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
}

#[test]
fn usage_and_domain_errors_exit_2() {
    for args in [
        &["count", "--x", "100", "--y", "3"][..],
        &["count", "--x", "1.5", "--y", "3", "--z", "6"],
        &["count", "--x", "100", "--y", "nan", "--z", "6"],
        &["sweep", "--x", "100", "--y-geom", "10:5"],
        &["orderstats", "--k", "5", "--u", "1", "--v", "6", "--samples", "10"],
        &["identities", "--kmax", "9"],
        &["blocks", "--x", "100", "--P", "100"],
        &["nonsense"],
    ] {
        let o = divlab(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn out_writes_file() {
    let dir = std::env::temp_dir().join(format!("divlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("blocks.csv");
    let o = divlab(&["blocks", "--x", "1e4", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("j,lambda,block_sum,deviation,overfull\n1,2,"));
    std::fs::remove_dir_all(&dir).unwrap();
}
