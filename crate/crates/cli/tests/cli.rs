use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn resil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resil")).args(args).output().expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = resil(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn duality_reports_gap_and_config() {
    let v = json_ok(&["duality", "--fn", "tribes:w=2,s=3", "--d", "1"]);
    let r = &v["result"];
    let (alpha, delta) = (r["alpha"].as_f64().unwrap(), r["delta"].as_f64().unwrap());
    assert!(r["gap"].as_f64().unwrap() <= 1e-6);
    assert!((alpha + delta - 1.0).abs() <= 1e-6);
    assert_eq!(v["config"]["command"], "duality");
    assert_eq!(v["config"]["fn"], "tribes:w=2,s=3");
    assert_eq!(v["config"]["d"], 1);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn cyclerun_build_certificates_are_zero() {
    let v = json_ok(&["cyclerun-build", "--n", "9", "--c1", "8"]);
    let r = &v["result"];
    let first = r["first_level_certificate"].as_array().unwrap();
    assert_eq!(first.len(), 9);
    assert!(first.iter().all(|c| c.as_i64() == Some(0)));
    assert_eq!(r["mean_certificate"], 0);
    assert_eq!(r["final_sigma"], 0);
    assert_eq!(r["audit"]["holds"], true);
}

#[test]
fn spectrum_csv_has_one_row_per_mask() {
    let out = resil(&["spectrum", "--fn", "cyclerun:n=5", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("mask,coefficient"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 32);
    let total: f64 = rows.iter().map(|r| r.split(',').nth(1).unwrap().parse::<f64>().unwrap().powi(2)).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn bad_inputs_exit_with_precondition_status() {
    for args in [
        &["duality", "--fn", "tribes:w=2,s=3,x=1", "--d", "1"][..],
        &["duality", "--fn", "tribes:w=2,s=3", "--d", "7"],
        &["cyclerun-build", "--n", "8"],
        &["learn", "--fn", "parity:n=4,k=3", "--d", "2", "--m", "100"],
        &["amplify", "--fn", "majority:n=3", "--k", "2"],
        &["ortho-family", "--fn", "majority:n=3", "--d", "1", "--n", "6"],
    ] {
        let out = resil(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
        assert_eq!(err["error"]["kind"], "precondition");
    }
}

#[test]
fn truth_table_round_trip_reproduces_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tribes.txt");
    let p = path.to_str().unwrap();
    assert!(resil(&["table", "--fn", "tribes:w=2,s=3", "--out", p]).status.success());
    let spec = format!("file:path={p}");
    for cmd in ["duality", "l1approx"] {
        let direct = json_ok(&[cmd, "--fn", "tribes:w=2,s=3", "--d", "1"]);
        let reread = json_ok(&[cmd, "--fn", &spec, "--d", "1"]);
        assert_eq!(direct["result"], reread["result"], "{cmd}");
    }
}

#[test]
fn out_flag_writes_the_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("design.json");
    let out = resil(&["design", "--n", "12", "--k", "5", "--d", "1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let sets = v["result"]["design"]["sets"].as_array().unwrap();
    assert!(sets.len() >= 2);
    for s in sets {
        let s: Vec<u64> = s.as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
        assert_eq!(s.len(), 5);
        assert!(s.windows(2).all(|w| w[0] < w[1]) && s[0] >= 1 && s[4] <= 12);
    }
}

#[test]
fn ortho_family_reads_a_design_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("design.json");
    let p = path.to_str().unwrap();
    assert!(resil(&["design", "--n", "12", "--k", "5", "--d", "1", "--out", p]).status.success());
    let v = json_ok(&["ortho-family", "--fn", "builder:n=5", "--d", "1", "--design", p]);
    let r = &v["result"];
    assert_eq!(r["orthogonal"], true);
    let exact = r["exact_gram"].as_array().unwrap();
    for (i, row) in exact.iter().enumerate() {
        for (j, x) in row.as_array().unwrap().iter().enumerate() {
            let expected = if i == j { 4096 } else { 0 };
            assert_eq!(x.as_i64(), Some(expected));
        }
    }
}

#[test]
fn witness_sweep_keeps_degenerate_rows() {
    let v = json_ok(&["witness", "--fn", "tribes:w=3,s=4", "--d", "1", "--tau", "0.1,0.2"]);
    let sweep = v["result"]["sweep"].as_array().unwrap();
    assert_eq!(sweep[0]["status"], "error");
    assert_eq!(sweep[1]["status"], "ok");
    assert_eq!(sweep[1]["certified"], true);
}

#[test]
fn learn_exact_with_dictator_class() {
    let v = json_ok(&["learn", "--fn", "dictator:n=4,i=1", "--scale", "0.8", "--d", "1", "--class", "dictators"]);
    let r = &v["result"];
    assert!(r["error"].as_f64().unwrap() <= 0.1 + 0.01 + 1e-12);
    assert_eq!(r["class"]["excess_ok"], true);
}

#[test]
fn sampled_learning_is_deterministic() {
    let args = ["learn", "--fn", "majority:n=5", "--d", "1", "--m", "400", "--seed", "9"];
    let a = json_ok(&args);
    let b = json_ok(&args);
    assert_eq!(a, b);
    assert_eq!(a["result"]["mode"]["mode"], "sampled");
    assert_eq!(a["result"]["mode"]["seed"], 9);
}

#[test]
fn ft_stats_table_covers_both_normalizations() {
    let out = resil(&["ft-stats", "--n", "12", "--t", "0.5,1", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    assert!(text.contains(",printed,") && text.contains(",standard,"));
}

#[test]
fn amplify_exact_level_reports_triangle() {
    let v = json_ok(&["amplify", "--fn", "majority:n=3", "--d", "1", "--k", "1"]);
    let r = &v["result"];
    assert_eq!(r["report"]["holds"], true);
    assert_eq!(r["report"]["measured"]["method"], "exact");
    assert_eq!(r["composition"]["block_ok"], true);
}

#[test]
fn every_subcommand_embeds_its_config() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("maj.txt");
    assert!(resil(&["table", "--fn", "majority:n=3", "--out", table.to_str().unwrap()]).status.success());
    assert!(Path::new(&table).exists());
    for args in [
        &["stats", "--fn", "majority:n=3"][..],
        &["resilience", "--fn", "parity:n=4,k=2", "--d", "1"],
        &["l1approx", "--fn", "and:n=2", "--d", "0"],
    ] {
        let v = json_ok(args);
        assert_eq!(v["config"]["command"], args[0]);
        assert_eq!(v["tool"], "resil");
    }
}
