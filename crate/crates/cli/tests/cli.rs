use std::process::{Command, Output};

use serde_json::Value;

fn gridac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridac"))
        .args(args)
        .env_remove("GRIDAC_CAP")
        .output()
        .expect("gridac runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let out = gridac(args);
    let v = serde_json::from_slice(&out.stdout).expect("stdout is one JSON record");
    (v, out.status.code().unwrap())
}

#[test]
fn count_records() {
    let (v, code) = json(&["count", "--n", "2", "--D", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["result"]["count"], "168");
    assert_eq!(v["result"]["middle_layer"], "6");
    assert_eq!(v["config"]["command"]["count"]["n"], 2);
    assert_eq!(v["tool"], "gridac");

    let (v, _) = json(&["count", "--n", "1", "--D", "3"]);
    assert_eq!(v["result"]["count"], "2");

    let (v, _) = json(&["count", "--n", "3", "--d", "1"]);
    assert_eq!(v["result"]["count"], "20");
    assert_eq!(v["result"]["erdos_szekeres_n3"], "21");
}

#[test]
fn certified_count_sandwich() {
    let (v, code) = json(&["count", "--n", "2", "--D", "5", "--certified"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["count"], "7581");
    assert_eq!(v["result"]["upper_bound_holds"], true);
    assert_eq!(v["result"]["lower_bound_holds"], true);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["chains", "--n", "2", "--D", "5", "--seed", "11", "--trials", "20", "--emit"];
    let a = gridac(&args);
    let b = gridac(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let other = gridac(&["chains", "--n", "2", "--D", "5", "--seed", "12", "--trials", "20", "--emit"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn chains_summary() {
    let (v, code) = json(&["chains", "--n", "3", "--D", "4", "--trials", "10"]);
    assert_eq!(code, 0);
    let r = &v["result"];
    assert_eq!(r["bound"], "247/4");
    assert_eq!(r["out_of_scope"], false);
    assert_eq!(r["bound_failures"], 0);
    assert!(r["max_chains"].as_u64().unwrap() <= 61);

    let (v, _) = json(&["chains", "--n", "3", "--D", "3", "--trials", "3"]);
    assert_eq!(v["result"]["out_of_scope"], true);
}

#[test]
fn supersat_csv_rows() {
    let out = gridac(&["supersat", "--n", "2", "--D", "6", "--trials", "7", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "n,D,a,size,b,bound,observed,pass");
    assert_eq!(rows.len(), 8);
    assert!(rows[1..].iter().all(|r| r.starts_with("2,6,1,") && r.ends_with(",true")));
}

#[test]
fn containers_with_family() {
    let (v, code) = json(&["containers", "--n", "2", "--D", "4", "--rounds", "1:8,3/7:6", "--family"]);
    assert_eq!(code, 0);
    let r = &v["result"];
    assert_eq!(r["family"]["complete"], true);
    assert_eq!(r["family"]["items"]["count_ok"], true);
    assert_eq!(r["bound"]["exact_count"], "168");
    assert_eq!(r["bound"]["above_exact"], true);
}

#[test]
fn exit_codes() {
    // premise fails for sets of 7 points
    let out = gridac(&["containers", "--n", "2", "--D", "4", "--rounds", "1:6"]);
    assert_eq!(out.status.code(), Some(1));
    let (v, code) = json(&["count", "--n", "2", "--D", "9"]);
    assert_eq!(code, 3);
    assert_eq!(v["status"], "error");
    assert_eq!(v["error"]["kind"], "cap_exceeded");
    assert_eq!(gridac(&["count", "--n", "2"]).status.code(), Some(2));
    assert_eq!(gridac(&["count", "--n", "0", "--D", "2"]).status.code(), Some(2));
    assert_eq!(gridac(&["containers", "--n", "2", "--D", "3", "--rounds", "x"]).status.code(), Some(2));
}

#[test]
fn cap_flag_and_environment() {
    let (v, code) = json(&["count", "--n", "2", "--D", "4", "--cap", "10"]);
    assert_eq!(code, 3, "{v}");
    let out = Command::new(env!("CARGO_BIN_EXE_gridac"))
        .args(["count", "--n", "2", "--D", "4"])
        .env("GRIDAC_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn timing_is_opt_in() {
    let (v, _) = json(&["asym", "--n", "2", "--D", "10"]);
    assert!(v.get("duration_ms").is_none());
    let (v, _) = json(&["asym", "--n", "2", "--D", "10", "--timing"]);
    assert!(v["duration_ms"].is_u64());
}

#[test]
fn out_file() {
    let path = std::env::temp_dir().join(format!("gridac-out-{}.csv", std::process::id()));
    let out = gridac(&["asym", "--n", "3", "--from", "2", "--to", "4", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows[0], "n,D,exact,estimate,relative_error");
    assert!(rows[1].starts_with("3,2,3,3.109"));
    assert_eq!(rows.len(), 4);
}

#[test]
fn level_exports() {
    let out = gridac(&["level-graph", "--n", "2", "--D", "3", "--level", "1", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0,0,1 1,0,1 1 1"));
    let (v, _) = json(&["level-graph", "--n", "3", "--D", "3", "--level", "2"]);
    assert_eq!(v["result"]["degree_identity_holds"], true);
    assert_eq!(v["result"]["lower_size"], 6);

    let (v, code) = json(&["distribution", "--n", "3", "--D", "4", "--level", "2"]);
    assert_eq!(code, 0);
    let atoms = v["result"]["distribution"]["atoms"].as_array().unwrap();
    assert!(!atoms.is_empty());
    assert_eq!(v["result"]["plan"]["regime"], "full_lower");
    assert_eq!(gridac(&["level-graph", "--n", "2", "--D", "3", "--level", "3"]).status.code(), Some(2));
}
