use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pointscatter"))
        .args(args)
        .env("POINTSCATTER_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_error(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("stderr has a line");
    serde_json::from_str(line).expect("stderr is a JSON error")
}

#[test]
fn presets_lists_every_family() {
    let out = run(&["presets"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_stdout(&out);
    assert_eq!(doc["command"], "presets");
    let names: Vec<&str> = doc["result"].as_array().unwrap().iter().map(|p| p["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["reflectionless", "scale-independent", "pure-reflection", "parity", "delta-prime"]);
}

#[test]
fn missing_required_flag_is_an_argument_error() {
    let out = run(&["smatrix"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_error(&out);
    assert!(err["detail"].as_str().unwrap().contains("--k"));
}

#[test]
fn unknown_flag_and_bad_values_exit_2() {
    assert_eq!(run(&["smatrix", "--k", "1", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["kernel", "--x", "0.2", "--x0", "0.3", "--tau", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--preset", "nonsense:a=1"]).status.code(), Some(2));
    let out = run(&["spectrum", "--preset", "delta-prime:c=1", "--alpha-plus", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_error(&out)["error"], "invalid_parameter");
}

#[test]
fn failed_tolerance_exits_3_and_still_writes_output() {
    let out = run(&["smatrix", "--k", "1.3", "--n", "50", "--alpha-plus", "1", "--alpha-minus", "2", "--tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(3));
    let doc = json_stdout(&out);
    assert!(doc["result"]["unitarity_error"].as_f64().unwrap() > 0.0);
    assert_eq!(stderr_error(&out)["error"], "tolerance");
}

#[test]
fn output_is_deterministic() {
    let args = ["spectrum", "--alpha-plus", "pi/3", "--alpha-minus", "2", "--e", "0.6,0,0.8", "--L", "1.5"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_round_trip_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let out = run(&[
        "smatrix",
        "--preset",
        "scale-independent:theta=1.1,phi=0.4",
        "--k",
        "2.5",
        "--n",
        "7",
        "--method",
        "chebyshev",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let out = run(&["smatrix", "--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let b: Value = serde_json::from_str(&std::fs::read_to_string(&second).unwrap()).unwrap();
    assert_eq!(a["result"], b["result"]);
    assert_eq!(a["config"]["method"], "chebyshev");
}

#[test]
fn csv_columns_match_json_fields() {
    let base = ["spectrum", "--preset", "parity:alpha_plus=4.5,alpha_minus=5.5,sign=1", "--kmax", "20"];
    let json = json_stdout(&run(&base));
    let roots = json["result"]["roots"].as_array().unwrap();
    assert!(!roots.is_empty());

    let mut args = base.to_vec();
    args.extend(["--format", "csv"]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let mut keys: Vec<String> = roots[0].as_object().unwrap().keys().cloned().collect();
    let mut sorted_header = header.clone();
    keys.sort();
    sorted_header.sort();
    assert_eq!(sorted_header, keys);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), roots.len());
    let k_col = header.iter().position(|h| h == "k").unwrap();
    for (row, root) in rows.iter().zip(roots) {
        assert_eq!(row[k_col].parse::<f64>().unwrap(), root["k"].as_f64().unwrap());
    }
}

#[test]
fn kernel_methods_agree_for_a_preset() {
    let common = ["kernel", "--preset", "delta-prime:c=0.7", "--x", "0.3", "--x0", "0.75", "--tau", "0.1"];
    let out = run(&common);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_stdout(&out);
    assert_eq!(doc["result"]["agree"], true);
    let both = doc["result"]["values"].as_array().unwrap();
    assert_eq!(both.len(), 2);

    let mut args = common.to_vec();
    args.extend(["--method", "closed"]);
    let closed = json_stdout(&run(&args));
    let c = closed["result"]["values"][0]["value"][0].as_f64().unwrap();
    let s = both[0]["value"][0].as_f64().unwrap();
    assert!((c - s).abs() < 1e-8, "{c} vs {s}");
}

#[test]
fn closed_form_needs_a_preset() {
    let out = run(&["kernel", "--x", "0.3", "--x0", "0.4", "--tau", "0.1", "--method", "closed"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn worldlines_enumerate_all_histories() {
    let out = run(&["worldlines", "--alpha-plus", "1", "--alpha-minus", "2.5", "--e", "0,0.6,0.8", "--k", "0.9", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_stdout(&out);
    assert_eq!(doc["result"]["worldlines"].as_array().unwrap().len(), 16);
    assert!(doc["result"]["max_deviation"].as_f64().unwrap() < 1e-12);
}

#[test]
fn trace_check_passes_on_a_generic_point() {
    let out = run(&["trace-check", "--alpha-plus", "pi/2", "--alpha-minus", "4*pi/3", "--e", "0.3,0.5,0.8124038404635961", "--sigma", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json_stdout(&out)["result"]["pass"], true);
}

#[test]
fn selftest_prints_a_table_or_json() {
    let out = run(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));

    let out = run(&["selftest", "--format", "json"]);
    let doc = json_stdout(&out);
    assert!(doc["result"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn timestamp_is_opt_in() {
    let plain = json_stdout(&run(&["presets"]));
    assert!(plain.get("timestamp").is_none());
    let stamped = json_stdout(&run(&["presets", "--timestamp"]));
    assert!(stamped["timestamp"].as_u64().unwrap() > 0);
}
