use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fpee(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpee")).args(args).env_remove("CHEF_LOG").output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = fpee(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn corpus_file(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(name).to_string_lossy().into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn missing_file_exits_4_with_message() {
    let out = fpee(&["analyze", "does/not/exist.fpl"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does/not/exist.fpl"));
}

#[test]
fn bad_flags_exit_4() {
    assert_eq!(fpee(&["analyze", "corpus:listing1", "--no-such-flag"]).status.code(), Some(4));
    assert_eq!(fpee(&["analyze", "corpus:listing1", "--model", "nonsense"]).status.code(), Some(4));
    assert_eq!(fpee(&["tune", "corpus:listing1", "--threshold", "abc"]).status.code(), Some(4));
    assert_eq!(fpee(&["validate", "corpus:listing1"]).status.code(), Some(4));
}

#[test]
fn frontend_errors_exit_1_and_faults_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.fpl", "func f(x: real): real { return x +; }\n");
    let out = fpee(&["analyze", &bad, "--set", "x=1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.fpl"));

    let oob = write(dir.path(), "oob.fpl", "func g(a: real[n], n: int): real { return a[n]; }\n");
    let out = fpee(&["analyze", &oob, "--set", "a=1;2", "--set", "n=2"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn listing1_one_row_reports_one_total() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "one-row.csv", "x,y\n1.95e-5,1.37e-7\n");
    let v = json(&["analyze", &corpus_file("listing1.fpl"), "--model", "shadow-cast", "--inputs", &csv]);
    let rows = v["report"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["total_error"].as_f64(), Some(8.255841542090283e-13));
    assert_eq!(v["inputs"]["kind"], "csv");
}

#[test]
fn user_model_report_matches_builtin_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "mymodel.txt", "model = \"taylor\"\nexpression = \"eps_m * abs(value) * abs(adjoint)\"\n");
    let user = format!("user:{model}");
    for kernel in ["corpus:listing1", "corpus:arc_length", "corpus:cg"] {
        let common = ["--format", "csv", "--rows", "3", "--size", "200", "--seed", "4"];
        let a = ok(&[&["analyze", kernel, "--model", &user][..], &common].concat());
        let b = ok(&[&["analyze", kernel, "--model", "taylor-default"][..], &common].concat());
        assert_eq!(a, b, "{kernel}");
    }
}

#[test]
fn square_sensitivity_at_three() {
    let dir = tempfile::tempdir().unwrap();
    let sq = write(dir.path(), "square.fpl", "func square(x: real): real { return x * x; }\n");
    let csv = ok(&["sensitivity", &sq, "--set", "x=3", "--format", "csv"]);
    assert!(csv.lines().any(|l| l == "x,18"), "{csv}");
}

#[test]
fn normalized_report_peaks_at_one() {
    let v = json(&["sensitivity", "corpus:arc_length", "--size", "100", "--normalize"]);
    let max = v["report"]["per_variable"].as_array().unwrap().iter().map(|x| x["normalized"].as_f64().unwrap()).fold(0.0, f64::max);
    assert_eq!(max, 1.0);
}

#[test]
fn cg_profile_has_fifty_rows() {
    let csv = ok(&["sensitivity", "corpus:cg", "--per-iteration", "i", "--track", "r,p,ap", "--format", "csv", "--rows", "2"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iteration,r,p,ap"));
    assert_eq!(lines.count(), 50);
}

#[test]
fn tune_extremes() {
    let all = json(&["tune", "corpus:simpsons", "--size", "100", "--threshold", "1e9"]);
    // Exactly representable values cost nothing to demote, so use a kernel
    // where every demotion has a nonzero error.
    let none = json(&["tune", "corpus:listing1", "--threshold", "1e-300"]);
    let candidates = all["report"]["candidates"].as_array().unwrap().len();
    assert_eq!(all["report"]["demoted"].as_array().unwrap().len(), candidates);
    assert!(none["report"]["demoted"].as_array().unwrap().is_empty());
}

#[test]
fn kmeans_tune_demotes_the_data_array() {
    let v = json(&["tune", "corpus:kmeans_distance", "--threshold", "1e-6"]);
    assert_eq!(v["report"]["demoted"], serde_json::json!(["attrs"]));
    assert_eq!(v["inputs"]["rows"], 1000);
}

#[test]
fn approx_maps() {
    let empty = json(&["approx", "corpus:black_scholes", "--map", ""]);
    assert_eq!(empty["report"]["estimated"]["accumulated"].as_f64(), Some(0.0));
    assert_eq!(empty["report"]["estimated"]["max"].as_f64(), Some(0.0));

    let dir = tempfile::tempdir().unwrap();
    let map = write(dir.path(), "map.txt", "# variable = function\nd = log\ns = sqrt\n");
    let a = json(&["approx", "corpus:black_scholes", "--map", &map]);
    let b = json(&["approx", "corpus:black_scholes", "--map", "d=log,s=sqrt,e=exp"]);
    for stat in ["average", "max", "accumulated"] {
        assert!(a["report"]["estimated"][stat].as_f64().unwrap() >= 0.0);
    }
    assert!(b["report"]["estimated"]["accumulated"].as_f64() > a["report"]["estimated"]["accumulated"].as_f64());
}

#[test]
fn validate_reports_estimate_and_actual() {
    let v = json(&["validate", "corpus:arc_length", "--precision-spec", "default=double,s1=single", "--size", "500", "--rows", "4"]);
    let rows = v["report"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(v["report"]["demoted"], serde_json::json!(["s1"]));
    assert!(rows.iter().all(|r| r["actual"].as_f64().unwrap() > 0.0));
}

#[test]
fn seeded_runs_are_deterministic() {
    let args = ["analyze", "corpus:black_scholes", "--rows", "20", "--seed", "9", "--model", "taylor-default"];
    assert_eq!(ok(&args), ok(&args));
    let sampled = ["analyze", &corpus_file("listing1.fpl"), "--sample", "normal(0:2),5,3"];
    assert_eq!(ok(&sampled), ok(&sampled));
    let mut other = sampled;
    other[3] = "normal(0:2),5,4";
    assert_ne!(ok(&sampled), ok(&other));
}

#[test]
fn dump_adjoint_matches_core_goldens() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/corpus");
    for name in ["listing1", "arc_length", "simpsons", "kmeans_distance", "cg", "black_scholes"] {
        let text = ok(&["dump-adjoint", &format!("corpus:{name}")]);
        let expected = std::fs::read_to_string(golden.join(format!("{name}.adj"))).unwrap();
        assert_eq!(text, expected, "{name}");
    }
}

#[test]
fn dump_adjoint_flag_writes_the_adjoint() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("l1.adj");
    ok(&["analyze", "corpus:listing1", "--model", "shadow-cast", "--dump-adjoint", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.matches("FinalizeEE").count(), 1);
}

#[test]
fn out_directory_receives_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    ok(&["sensitivity", "corpus:cg", "--per-iteration", "i", "--rows", "1", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert!(out.join("sensitivity.csv").is_file());
    assert!(out.join("per_iteration.csv").is_file());
    ok(&["corpus", "run", "listing1", "--out", out.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out.join("listing1.json")).unwrap()).unwrap();
    assert_eq!(v["command"], "tune");
}

#[test]
fn corpus_list_names_every_kernel() {
    let v = json(&["corpus", "list"]);
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|k| k["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["listing1", "arc_length", "simpsons", "kmeans_distance", "cg", "black_scholes"]);
}
