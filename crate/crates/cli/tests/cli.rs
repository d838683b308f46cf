use std::process::{Command, Output};

use serde_json::Value;

fn relcomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relcomp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(stdout(o).trim()).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn eval_constant() {
    let o = relcomp(&["eval", "(const 7)", "3", "bits:1010*", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("value 7\n"), "{}", stdout(&o));
}

#[test]
fn eval_query_as_json() {
    let o = relcomp(&["eval", "(query id)", "2", "bits:1010*", "100", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["value"], "1");
}

#[test]
fn eval_numeric_code_with_flags() {
    // 17 = Query(Succ)
    let o = relcomp(&["eval", "17", "0", "--oracle", "bits:01", "--json"]);
    assert_eq!(json(&o)["value"], "1");
}

#[test]
fn fuel_exhaustion_has_its_own_exit_code() {
    let o = relcomp(&["eval", "(comp succ succ)", "0", "--fuel", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("FUEL-EXHAUSTED"));
}

#[test]
fn parse_errors_report_a_position() {
    let o = relcomp(&["eval", "(comp succ", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at byte 10"), "{}", stderr(&o));
    let o = relcomp(&["eval", "id", "0", "bits:10x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("oracle"), "{}", stderr(&o));
}

#[test]
fn unknown_suite_lists_valid_ones() {
    let o = relcomp(&["verify", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for s in ["fixed-indices", "star-laws", "join-laws", "comvar", "lmc1", "redu", "ceer-bridge"] {
        assert!(err.contains(s), "{err}");
    }
}

#[test]
fn verify_reports_are_deterministic() {
    let dir = std::env::temp_dir().join(format!("relcomp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (a, b) = (dir.join("a.jsonl"), dir.join("b.jsonl"));
    for path in [&a, &b] {
        let o = relcomp(&["verify", "star-laws", "--seed", "9", "--samples", "20", "--report", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ra, rb);
    let text = String::from_utf8(ra).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["schema"], "v1");
    let summary = &lines.last().unwrap()["summary"];
    assert_eq!(summary["fails"], 0);
    assert_eq!(summary["records"].as_u64().unwrap() as usize, lines.len() - 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_lmc1_round_trip_record() {
    let o = relcomp(&["verify", "lmc1", "--samples", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rec: Value = text
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .find(|v| v["name"] == "roundtrip-bits")
        .expect("roundtrip-bits record");
    assert_eq!(rec["detail"]["verified"], true);
}

#[test]
fn compose_prints_codes_and_verdicts() {
    // Query(Id) * Query(Succ) reads x shifted by one
    let o = relcomp(&["compose", "5", "17", "--oracle", "bits:0110*", "--window", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["star"]["program"], "(withoracle (query id) (query succ))");
    assert_eq!(v["verdict"]["verdict"], "Holds");
    let o = relcomp(&["compose", "(query succ)", "(query pred)", "--with", "5", "5", "--oracle", "bits:0110*"]);
    let v = json(&o);
    assert!(v["sstar"]["fwd"]["program"].is_string());
    assert!(v["verdict"]["verdict"].is_string());
}

#[test]
fn demo_lmc1_recovers_x() {
    let o = relcomp(&["demo-lmc1", "--family", "prepend-1", "--oracle", "bits:1011*"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["recoveredBits"], "1011".repeat(8));
    assert_eq!(v["verified"], true);
    for key in ["k", "n0", "reductionCode"] {
        assert!(!v[key].is_null(), "{key}");
    }
}

#[test]
fn demo_redu_through_noise() {
    let o = relcomp(&[
        "demo-redu",
        "--oracle",
        "bits:0010111*",
        "--y",
        "join(bits:0010111*,bits:110*)",
        "--k",
        "(query (add id id))",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["verified"], true);
    assert_eq!(v["side"], "Left");
    assert_eq!(v["m"], "0");
}

#[test]
fn demo_redu_with_a_wrong_reduction_is_not_verified() {
    // y is not x here, so the recovered bits are those of y
    let o = relcomp(&["demo-redu", "--oracle", "bits:01*", "--y", "bits:1*"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["verified"], false);
}
