use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use kamjet::arithmetic::{sigma, FrequencyVector, SigmaOptions};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_kamjet"));
    c.env_remove("KAMJET_OUT");
    c
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kamjet-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}\nstdout: {}", String::from_utf8_lossy(&out.stderr), String::from_utf8_lossy(&out.stdout));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn sigma_float_matches_library() {
    let out = run(&["--mode", "float", "sigma", "--alpha", "1,1.6180339887", "--kmax", "8"]);
    let v = stdout_json(&out);
    let expect = sigma(&FrequencyVector::new(vec![1.0, 1.6180339887]).unwrap(), 8, SigmaOptions::default()).unwrap();
    let got: Vec<f64> = serde_json::from_value(v["result"]["sequence"].clone()).unwrap();
    assert_eq!(got, expect.values);
    assert_eq!(v["config"]["command"]["kind"], "sigma");
    assert_eq!(v["config"]["mode"], "float");
}

#[test]
fn sigma_rational_is_exact() {
    let out = run(&["sigma", "--alpha", "1,1/2+1/2*sqrt5", "--kmax", "3"]);
    let v = stdout_json(&out);
    // golden vector: 1, φ−1 at (−1,1), 2φ−3 at (−3,2), 5−3φ at (5,−3)
    let seq: Vec<String> = serde_json::from_value(v["result"]["sequence"].clone()).unwrap();
    assert_eq!(seq, ["1", "-1/2+1/2*sqrt5", "-2+sqrt5", "7/2-3/2*sqrt5"]);
}

#[test]
fn empty_config_is_schema_error() {
    let dir = scratch("empty");
    let path = dir.join("empty.json");
    std::fs::write(&path, "{}").unwrap();
    let out = run(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"]["code"], 2);
    assert_eq!(v["error"]["module"], "config");
}

#[test]
fn module_and_io_errors_have_codes() {
    let flagship = data("flagship.jet");
    let out = run(&["birkhoff", "--input", flagship.to_str().unwrap(), "--order", "4"]);
    assert_eq!(out.status.code(), Some(13));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"]["module"], "birkhoff");

    let out = run(&["birkhoff", "--input", "/nonexistent/h.jet", "--order", "4"]);
    assert_eq!(out.status.code(), Some(3));

    let quartic = data("quartic.jet");
    let out = run(&["birkhoff", "--input", quartic.to_str().unwrap(), "--order", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rerunning_recorded_config_reproduces_output() {
    let dir = scratch("rerun");
    let out_dir = dir.join("out");
    let first = run(&[
        "--seed",
        "11",
        "--out",
        out_dir.to_str().unwrap(),
        "density",
        "--x0",
        "1,1.618033988749895",
        "--r",
        "0.1,0.01",
        "--samples",
        "500",
    ]);
    assert!(first.status.success());
    let csv_first = std::fs::read_to_string(out_dir.join("density.csv")).unwrap();
    let artifact = dir.join("density.json");
    std::fs::write(&artifact, &first.stdout).unwrap();
    let second = run(&["run", "--config", artifact.to_str().unwrap()]);
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(csv_first, std::fs::read_to_string(out_dir.join("density.csv")).unwrap());

    let mut lines = csv_first.lines();
    assert_eq!(lines.next(), Some("r,samples,fraction,k_max,seed"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("0.1,500,") && rows[0].ends_with(",8,11"));
}

#[test]
fn kam_run_emits_trace_lines() {
    let problem = data("flagship_problem.json");
    let out = run(&["kam", "run", "--problem", problem.to_str().unwrap()]);
    assert!(out.status.success());
    let lines: Vec<Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines.len() >= 3);
    assert_eq!(lines[0]["config"]["command"]["kind"], "kam");
    let stages = &lines[1..lines.len() - 1];
    let ords: Vec<u64> = stages.iter().map(|s| s["ord_b"].as_u64().unwrap()).collect();
    assert_eq!(ords[0], 3);
    assert!(ords.windows(2).all(|w| w[1] > w[0]), "{ords:?}");
    for (n, s) in stages.iter().enumerate() {
        assert_eq!(s["stage"].as_u64().unwrap() as usize, n);
        assert!(s["norms"]["b"].is_array());
    }
    let result = &lines[lines.len() - 1]["result"];
    assert_eq!(result["converged"], true);
    assert_eq!(result["scenario"], "fiber");
}

#[test]
fn kam_run_respects_stage_cap_and_float_mode() {
    let problem = data("flagship_problem.json");
    let out = run(&["--mode", "float", "kam", "run", "--problem", problem.to_str().unwrap(), "--stages", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["result"]["converged"], false);
    assert_eq!(last["result"]["stages"], 2);
}

#[test]
fn extended_problem_reports_frequency() {
    let problem = data("resonant_problem.json");
    let out = run(&["kam", "run", "--problem", problem.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    let freq = &last["result"]["frequency"][0]["terms"];
    // pq + (pq)²: ω(λ) = 1 + 2λ
    assert_eq!(freq[0]["coeff"], "1");
    assert_eq!(freq[1]["coeff"], "2");
    assert_eq!(freq[1]["exponents"], serde_json::json!([0, 0, 1, 0]));
}

#[test]
fn birkhoff_quartic_in_both_modes() {
    let quartic = data("quartic.jet");
    let v = stdout_json(&run(&["birkhoff", "--input", quartic.to_str().unwrap(), "--order", "8"]));
    let r = &v["result"];
    assert!(r["residual_order"].as_u64().unwrap() > 8);
    let terms = r["a_real"]["terms"].as_array().unwrap();
    let x2 = terms.iter().find(|t| t["exponents"] == serde_json::json!([2])).unwrap();
    assert_eq!(x2["coeff"], "3/2");

    let v = stdout_json(&run(&["--mode", "float", "birkhoff", "--input", quartic.to_str().unwrap(), "--order", "4"]));
    let terms = v["result"]["a_real"]["terms"].as_array().unwrap();
    let x2 = terms.iter().find(|t| t["exponents"] == serde_json::json!([2])).unwrap();
    assert_eq!(x2["coeff"], "1.5");
}

#[test]
fn torus_scan_writes_orbit_tables() {
    let dir = scratch("torus");
    let h = data("torus_integrable.jet");
    let out = run(&[
        "--out",
        dir.to_str().unwrap(),
        "--jobs",
        "2",
        "torus",
        "scan",
        "--H",
        h.to_str().unwrap(),
        "--r",
        "0.2,0.1",
        "--samples",
        "4",
        "--steps",
        "4096",
    ]);
    let v = stdout_json(&out);
    let r = &v["result"];
    assert_eq!(r["fractions"], serde_json::json!([1.0, 1.0]));
    assert!(r["convention"].as_str().unwrap().contains("-2"));
    let csv = std::fs::read_to_string(dir.join("torus_r0.2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x0,drift,stability,class"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|l| l.ends_with(",torus_like")));
}

#[test]
fn lattice_strips_bruno_and_report() {
    let dir = scratch("report");
    let lat = stdout_json(&run(&["lattice", "--alpha", "1,1.618033988749895", "--t", "0"]));
    assert!(lat["result"]["shortest"]["delta_estimate"].as_f64().unwrap() > 0.0);
    let strips = stdout_json(&run(&["strips", "--alpha", "1,1.618033988749895", "--r", "0.01", "--kmax", "3"]));
    assert!(strips["result"]["count"].as_u64().unwrap() > 0);
    let bruno = run(&["bruno", "--alpha", "1,1.618033988749895"]);
    let path = dir.join("bruno.json");
    std::fs::write(&path, &bruno.stdout).unwrap();
    let rep = stdout_json(&run(&["report", path.to_str().unwrap()]));
    let row = &rep["result"]["artifacts"][0];
    assert_eq!(row["command"], "bruno");
    assert_eq!(row["summary"]["k_max"], 8);
}

#[test]
fn out_dir_defaults_from_environment() {
    let dir = scratch("env");
    let out = bin()
        .env("KAMJET_OUT", &dir)
        .args(["density", "--x0", "1,1.618033988749895", "--r", "0.1", "--samples", "10", "--csv", "d.csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.join("d.csv").exists());
}
