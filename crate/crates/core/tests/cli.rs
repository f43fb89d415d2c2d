use std::path::Path;
use std::process::{Command, Output};

use dqvalue_core::cli::{NullDistReport, QReport};
use dqvalue_core::pi0::Pi0Estimate;
use dqvalue_core::sim::McReport;

fn dq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dq")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).unwrap();
    rdr.records().map(|r| r.unwrap()[idx].to_string()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn nulldist_tables() {
    let out = stdout(&dq(&["nulldist", "--test", "ks", "--n1", "4", "--n2", "4"]));
    assert_eq!(column(&out, "common"), ["1/35", "8/35", "27/35", "35/35"]);
    assert_eq!(column(&out, "decimal")[1], "0.2285714286");
    let out = stdout(&dq(&["nulldist", "--test", "wilcoxon", "--n1", "5", "--n2", "5"]));
    let want: Vec<String> = [1, 2, 4, 7, 12, 19, 28, 39, 53, 69, 87, 106, 126]
        .iter()
        .map(|k| format!("{k}/126"))
        .collect();
    assert_eq!(column(&out, "common"), want);
    let json = stdout(&dq(&["nulldist", "--test", "signed_rank", "--n1", "4", "--format", "json"]));
    let report: NullDistReport = serde_json::from_str(&json).unwrap();
    assert_eq!(report.points.last().unwrap().fraction, "1");
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", json);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(dq(&["nulldist", "--test", "bogus", "--n1", "4", "--n2", "4"]).status.code(), Some(2));
    assert_eq!(dq(&["nulldist", "--test", "t_welch", "--n1", "4", "--n2", "4"]).status.code(), Some(2));
    assert_eq!(dq(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.txt", "0.5\n0.2\n");
    assert_eq!(dq(&["pi0", &f, "--methods", "Liang"]).status.code(), Some(2));
    assert_eq!(dq(&["pi0", &f, "--methods", "Real"]).status.code(), Some(2));
}

#[test]
fn data_errors_exit_1() {
    let out = dq(&["pi0", "/definitely/not/here.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "p.txt", "0.5\n0.3\n1\n");
    let out = dq(&["pi0", &f, "--support", "1/2,1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2 (0.3)"));
    let f = write(dir.path(), "bad.txt", "0.5\nnope\n");
    let out = dq(&["pi0", &f]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
}

#[test]
fn pi0_capped_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ones.txt", &"1\n".repeat(20));
    let out = stdout(&dq(&["pi0", &f, "--support", "1/2,1", "--method", "SS"]));
    assert_eq!(column(&out, "value"), ["1"]);
    assert_eq!(column(&out, "raw"), ["2.1"]);
    let json = stdout(&dq(&["pi0", &f, "--support", "1/2,1", "--format", "json"]));
    let est: Vec<Pi0Estimate> = serde_json::from_str(&json).unwrap();
    assert_eq!(est.len(), 5);
    assert!(est.iter().all(|e| e.value == 1.0));
}

#[test]
fn st_on_a_discrete_null_sample_sits_above_the_others() {
    // a Wilcoxon(4,4) null sample with frequencies proportional to the masses
    let masses = [1, 1, 2, 3, 5, 5, 7, 7, 4];
    let points = [1, 2, 4, 7, 12, 17, 24, 31, 35];
    let mut text = String::new();
    for (k, t) in masses.iter().zip(points) {
        for _ in 0..k * 10 {
            text.push_str(&format!("{}\n", t as f64 / 35.0));
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "null.txt", &text);
    let out = stdout(&dq(&["pi0", &f, "--test", "wilcoxon", "--n1", "4", "--n2", "4"]));
    let methods = column(&out, "method");
    let raw: Vec<f64> = column(&out, "raw").iter().map(|v| v.parse().unwrap()).collect();
    let st = raw[methods.iter().position(|m| m == "ST").unwrap()];
    let liang = raw[methods.iter().position(|m| m == "Liang").unwrap()];
    assert!(st > 0.9 && st > liang, "ST {st}, Liang {liang}");
}

#[test]
fn qvalue_sweep_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<String> = (1..=60).map(|i| format!("{}", (i as f64 / 60.0).powi(3))).collect();
    let f = write(dir.path(), "p.csv", &format!("pvalue\n{}\n", values.join("\n")));
    let out_path = dir.path().join("q.csv");
    stdout(&dq(&[
        "qvalue",
        &f,
        "--method",
        "SS",
        "--alpha-grid",
        "0.2,0.01,0.05,0.1",
        "--out",
        out_path.to_str().unwrap(),
    ]));
    let sweep = std::fs::read_to_string(dir.path().join("q.sweep.csv")).unwrap();
    let r: Vec<usize> = column(&sweep, "rejections").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(r.len(), 4);
    assert!(r.windows(2).all(|w| w[0] <= w[1]), "{r:?}");
    assert!(std::fs::read_to_string(dir.path().join("q.summary.csv")).unwrap().starts_with("method,pi0"));
}

#[test]
fn analyze_single_variable() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "m.csv", "a1,a2,a3,b1,b2,b3\n1.0,2.0,3.0,2.5,3.5,4.5\n");
    let json = stdout(&dq(&["analyze", &f, "--test", "t_pooled", "--n1", "3", "--method", "SS", "--format", "json"]));
    let r: QReport = serde_json::from_str(&json).unwrap();
    let v = &r.variables[0];
    let p = v.pvalue.unwrap();
    let pi0 = r.methods[0].pi0.value;
    assert_eq!(v.qvalues[0], Some((pi0 * p).min(1.0)));
}

#[test]
fn analyze_identical_groups() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("gene,a1,a2,a3,a4,b1,b2,b3,b4\n");
    for i in 0..12 {
        let row = [1.0, 2.5, 4.0, 7.0].map(|v| v + i as f64);
        let cells: Vec<String> = row.iter().chain(row.iter()).map(|v| v.to_string()).collect();
        text.push_str(&format!("g{i},{}\n", cells.join(",")));
    }
    let f = write(dir.path(), "m.csv", &text);
    for test in ["abs", "ji"] {
        let json = stdout(&dq(&["analyze", &f, "--test", test, "--n1", "4", "--format", "json"]));
        let r: QReport = serde_json::from_str(&json).unwrap();
        assert!(r.variables.iter().all(|v| v.pvalue == Some(1.0) && v.pvalue_exact.as_deref() == Some("1")));
        assert!(r.methods.iter().all(|m| m.rejections == 0));
    }
    // rank tests reject tied data, here in every variable
    let out = dq(&["analyze", &f, "--test", "wilcoxon", "--n1", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("g0: tied"));
}

#[test]
fn analyze_reports_ties_per_variable() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "m.csv",
        "1,2,3,4,5,6,7,8\n1,1,3,4,5,6,7,8\n8,7,6,5,4,3,2,1\n",
    );
    let out = dq(&["analyze", &f, "--test", "wilcoxon", "--n1", "4", "--method", "SS"]);
    let text = stdout(&out);
    let errors = column(&text, "error");
    assert!(errors[0].is_empty() && errors[1].contains("tied") && errors[2].is_empty());
    assert_eq!(column(&text, "pvalue_exact")[0], "1/35");
}

const CONFIG: &str = r#"{"family": "location", "mu": 2, "m": 60, "n1": 4, "n2": 4, "delta": DELTA,
    "dependence": "dependent", "test": "wilcoxon", "replicates": REPS, "alpha": 0.05,
    "seed": 5, "methods": ["SS", "Liang", "Chen", "Rand", "Real"]}"#;

fn config(delta: &str, reps: &str) -> String {
    CONFIG.replace("DELTA", delta).replace("REPS", reps)
}

#[test]
fn simulate_global_null_and_single_replicate() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "null.json", &config("0", "40"));
    let prefix = dir.path().join("null");
    let echoed = stdout(&dq(&["simulate", &f, "--out", prefix.to_str().unwrap()]));
    assert!(echoed.contains("\"seed\": 5"));
    let csv = std::fs::read_to_string(prefix.with_extension("csv")).unwrap();
    assert!(column(&csv, "power").iter().all(String::is_empty));
    assert!(column(&csv, "fdr").iter().all(|v| v.parse::<f64>().unwrap() < 0.05));
    let json = std::fs::read_to_string(prefix.with_extension("json")).unwrap();
    let report: McReport = serde_json::from_str(&json).unwrap();
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", json);

    let f = write(dir.path(), "one.json", &config("0.3", "1"));
    let csv = stdout(&dq(&["simulate", &f]));
    assert!(column(&csv, "pi0_sd").iter().all(String::is_empty));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.json", &config("0.4", "30"));
    let a = stdout(&dq(&["simulate", &f]));
    let b = stdout(&dq(&["simulate", &f]));
    assert_eq!(a, b);
    let c = stdout(&dq(&["simulate", &f, "--seed", "6"]));
    assert_ne!(a, c);
}

#[test]
fn simulate_schema_errors_name_fields() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.json", &config("0.4", "30").replace("\"seed\"", "\"sed\""));
    let out = dq(&["simulate", &f]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sed"));
    let f = write(dir.path(), "bad2.json", &config("0.4", "\"many\""));
    let err = String::from_utf8_lossy(&dq(&["simulate", &f]).stderr).to_string();
    assert!(err.contains("'replicates'"), "{err}");
    let out = Command::new(env!("CARGO_BIN_EXE_dq"))
        .args(["simulate", &write(dir.path(), "ok.json", &config("0.4", "2"))])
        .env("DQ_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
