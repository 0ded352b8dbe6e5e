use std::process::{Command, Output};

use serde_json::Value;

fn polyharm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyharm")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = polyharm(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn records(doc: &Value) -> &Vec<Value> {
    doc["records"].as_array().expect("records array")
}

#[test]
fn classify_degree_three_at_its_threshold() {
    let doc = json(&["classify", "--degree", "3", "--m1", "4", "--r", "20", "--format", "json"]);
    assert_eq!(doc["command"], "classify");
    assert_eq!(doc["summary"]["count"], 4);
    let recs = records(&doc);
    assert_eq!(recs.len(), 4);
    for r in recs {
        assert!(r["relative_residual"].as_f64().unwrap() < 1e-10);
        assert_eq!(r["source"], "quadratic");
    }
    // x = −1/5 and x = −1/2 are rational
    let dens: Vec<&str> = recs.iter().map(|r| r["exact"]["den"].as_str().unwrap()).collect();
    assert_eq!(dens, ["5", "2", "2", "5"]);
}

#[test]
fn thresholds_for_seven_eight() {
    let doc = json(&["thresholds", "--m1", "7", "--m2", "8"]);
    let rec = &records(&doc)[0];
    assert_eq!((rec["rstar"].as_u64(), rec["rstarstar"].as_u64()), (Some(38), Some(47)));
    assert_eq!((rec["bound_rstar"].as_u64(), rec["bound_rstarstar"].as_u64()), (Some(41), Some(51)));
    assert_eq!(rec["b"]["num"], "8");
    assert_eq!(rec["b"]["den"], "7");
}

#[test]
fn thresholds_brute_force_agrees() {
    let doc = json(&["thresholds", "--b", "2", "--brute-force", "--r-max", "90", "--grid", "50000"]);
    let bf = &records(&doc)[0]["brute_force"];
    assert_eq!((bf["rstar"].as_u64(), bf["rstarstar"].as_u64()), (Some(26), Some(74)));
}

#[test]
fn bounds_for_large_ratio() {
    let doc = json(&["bounds", "--b", "10000"]);
    let rec = &records(&doc)[0];
    assert_eq!((rec["bound_rstar"].as_u64(), rec["bound_rstarstar"].as_u64()), (Some(9), Some(400005)));
}

#[test]
fn unsupported_degree_exits_with_four() {
    let out = polyharm(&["classify", "--degree", "5", "--m1", "1", "--r", "3"]);
    assert_eq!(out.status.code(), Some(4));
    let diag: Value = serde_json::from_slice(&out.stderr).expect("diagnostic JSON line");
    assert_eq!(diag["kind"], "unsupported");
    assert!(out.stdout.is_empty());
}

#[test]
fn conflicting_ratio_is_a_usage_error() {
    let out = polyharm(&["thresholds", "--b", "2", "--m1", "1", "--m2", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_sweep_range_is_a_usage_error() {
    let out = polyharm(&["sweep", "--degree", "3", "--m1", "1", "--r-from", "9", "--r-to", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_family_is_a_usage_error() {
    let out = polyharm(&["classify", "--degree", "3", "--m1", "1", "--m2", "2", "--r", "20"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["sweep", "--b-list", "1,8/7,2,10", "--format", "json"];
    let a = polyharm(&args);
    let b = polyharm(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let one = Command::new(env!("CARGO_BIN_EXE_polyharm"))
        .args(args)
        .env("POLYHARM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, one.stdout);
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_polyharm"))
        .args(["bounds", "--b", "2"])
        .env("POLYHARM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_has_a_header_row() {
    let out = polyharm(&["table", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("section,degree,m1,m2,b,rstar,rstarstar,bound_rstar,bound_rstarstar"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().any(|r| r.starts_with("equal-multiplicity threshold,6,") && r.contains(",110,110,")));
    assert!(rows.iter().any(|r| r.ends_with(",5,312919,9,400005")));
}

#[test]
fn output_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bounds.json");
    let out = polyharm(&["bounds", "--b", "8/7", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(records(&doc)[0]["bound_rstarstar"], 51);
}

#[test]
fn sweep_over_orders_switches_on_at_twenty() {
    let doc = json(&["sweep", "--degree", "3", "--m1", "1", "--r-from", "2", "--r-to", "25"]);
    let counts: Vec<u64> = records(&doc).iter().map(|r| r["count"].as_u64().unwrap()).collect();
    assert_eq!(counts.len(), 24);
    for (i, c) in counts.iter().enumerate() {
        let r = i + 2;
        assert_eq!(*c, if r < 20 { 0 } else { 4 }, "r = {r}");
    }
}

#[test]
fn floats_carry_seventeen_digits() {
    let out = polyharm(&["thresholds", "--b", "8/7", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    let y1 = row.split(',').nth(1).unwrap();
    let mantissa = y1.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{y1}");
}

#[test]
fn clifford_roots_flag_the_minimal_torus() {
    let doc = json(&["roots", "--degree", "2", "--m1", "2", "--m2", "2", "--r", "4"]);
    let recs = records(&doc);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["multiplicity"], 4);
    assert!(recs[0]["s_values"].as_array().unwrap().is_empty());
    let doc = json(&["classify", "--degree", "2", "--m1", "2", "--m2", "2", "--r", "4"]);
    assert_eq!(doc["summary"]["count"], 0);
}

#[test]
fn quartic_roots_match_classification() {
    let roots = json(&["roots", "--degree", "4", "--b", "8/7", "--m1", "7", "--m2", "8", "--r", "47"]);
    let classified = json(&["classify", "--degree", "4", "--m1", "7", "--m2", "8", "--r", "47"]);
    let from_roots: Vec<f64> =
        records(&roots).iter().map(|r| r["s_values"][0].as_f64().unwrap()).collect();
    let mut from_classify: Vec<f64> =
        records(&classified).iter().map(|r| r["s"].as_f64().unwrap()).collect();
    from_classify.sort_by(f64::total_cmp);
    let mut sorted = from_roots.clone();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(sorted.len(), 4);
    for (a, b) in sorted.iter().zip(&from_classify) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn geometry_check_on_a_small_sphere() {
    let doc = json(&["verify-geom", "--chart", "sphere", "--m", "3", "--r", "2"]);
    let s = &doc["summary"];
    assert!((s["mean_a2"].as_f64().unwrap() - 3.0).abs() < 1e-6);
    assert_eq!(s["criterion"]["holds"], true);
    assert_eq!(records(&doc).len(), 8);
}

#[test]
fn geometry_check_requires_a_complete_chart() {
    let out = polyharm(&["verify-geom", "--chart", "clifford", "--m1", "1", "--m2", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
