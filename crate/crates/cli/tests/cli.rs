use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn partorbit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_partorbit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn write_labels(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn generate_noiseless_square() {
    let out = partorbit(&["generate", "--kind", "g4", "--sigma", "0", "--m-c", "1", "--format", "csv"]);
    assert_eq!(stdout(&out), "0,0\n1,0\n0,1\n1,1\n");
}

#[test]
fn identical_label_files_are_homogeneous() {
    let dir = tempfile::tempdir().unwrap();
    for i in 0..4 {
        write_labels(dir.path(), &format!("run{i}.txt"), "1,1,2,2,3\n");
    }
    let report = json(&partorbit(&["homogeneity", dir.path().to_str().unwrap()]));
    assert_eq!(report["h_star"], 1.0);
    assert_eq!(report["n"], 4);
}

#[test]
fn two_partition_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_labels(dir.path(), "a.txt", "1,1,2,2,2\n");
    let b = write_labels(dir.path(), "b.txt", "1,1,1,2,2\n");
    let report = json(&partorbit(&["homogeneity", &a, &b]));
    assert_eq!(report["h_star"], 0.5);
    assert_eq!(report["outliers"], serde_json::json!([1]));

    let csv = stdout(&partorbit(&["homogeneity", &a, &b, "--format", "csv"]));
    assert_eq!(csv.lines().next(), Some("index,alpha,h,outlier"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn missing_file_exits_two_and_names_path() {
    let out = partorbit(&["homogeneity", "/no/such/labels.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/labels.txt"));
}

#[test]
fn malformed_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_labels(dir.path(), "bad.csv", "1,0\n0,x\n");
    let out = partorbit(&["mean", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.csv") && err.contains("line 2"), "{err}");
}

#[test]
fn exact_mean_guard_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<String> = (0..3)
        .map(|i| write_labels(dir.path(), &format!("{i}.txt"), "1,2,3,4,5,5\n"))
        .collect();
    let mut args = vec!["mean", "--exact"];
    args.extend(files.iter().map(String::as_str));
    let out = partorbit(&args);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn mean_of_identical_sample() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_labels(dir.path(), "a.txt", "1,1,2\n");
    let b = write_labels(dir.path(), "b.txt", "2,2,1\n");
    let result = json(&partorbit(&["mean", &a, &b]));
    assert_eq!(result["value"], 0.0);
    let exact = json(&partorbit(&["mean", "--exact", &a, &b]));
    assert_eq!(exact["minimizers"].as_array().unwrap().len(), 1);
}

#[test]
fn cluster_writes_label_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("runs");
    let out = partorbit(&[
        "cluster", "--kind", "g4", "--sigma", "0", "--m-c", "5", "-k", "4", "-n", "3", "--seed", "9", "--out",
        out_dir.to_str().unwrap(),
    ]);
    stdout(&out);
    let mut names: Vec<_> = fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names, ["run_000.labels", "run_001.labels", "run_002.labels"]);
    let text = fs::read_to_string(out_dir.join("run_000.labels")).unwrap();
    assert!(text.starts_with("# clusters=4\n"));

    let report = json(&partorbit(&["homogeneity", out_dir.to_str().unwrap()]));
    assert_eq!(report["h_star"], 1.0);
}

#[test]
fn protocol_singleton_sample() {
    let dir = tempfile::tempdir().unwrap();
    let out = partorbit(&[
        "protocol", "--kind", "g4", "--values", "4", "--trials", "1", "-n", "1", "--out",
        dir.path().to_str().unwrap(),
    ]);
    stdout(&out);
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["k,mean_h_star,std_h_star,trials", "4,1,0,1"]);
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["rows"][0]["h_star_trials"], serde_json::json!([1.0]));
    assert!(report["runtime_secs"].is_number());
    assert!(fs::read_to_string(dir.path().join("report.svg")).unwrap().starts_with("<svg"));
    assert!(dir.path().join("trials.csv").exists());
}

#[test]
fn protocol_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    fs::write(&cfg, "kind = g4\nsigma = 0.05\nm_c = 10\nsweep = sigma\nk = 4\nvalues = 0.05, 0.1\ntrials = 2\nn = 3\n").unwrap();
    let csv = stdout(&partorbit(&["protocol", "--config", cfg.to_str().unwrap(), "--format", "csv"]));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
    assert!(csv.contains("\n0.05,"));
}

#[test]
fn protocol_failure_is_flushed() {
    let dir = tempfile::tempdir().unwrap();
    let out = partorbit(&[
        "protocol", "--kind", "g4", "--m-c", "1", "--values", "3,4,5", "--trials", "1", "-n", "2", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.contains("\n4,"));
    assert!(csv.contains("# failure: k = 5"));
}

#[test]
fn invalid_sweep_is_rejected() {
    let out = partorbit(&["protocol", "--kind", "g4", "--values", "5,3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn select_single_k() {
    let dir = tempfile::tempdir().unwrap();
    let out = partorbit(&[
        "select", "--kind", "g4", "--sigma", "0.05", "--ks", "3", "-n", "5", "--out",
        dir.path().to_str().unwrap(),
    ]);
    stdout(&out);
    let profile: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("profile.json")).unwrap()).unwrap();
    assert_eq!(profile["profile"]["selected"], 3);
    let sizes = fs::read_to_string(dir.path().join("cluster_sizes.csv")).unwrap();
    assert_eq!(sizes.lines().filter(|l| l.starts_with("3,")).count(), 3);
}

#[test]
fn csv_ingestion_flags() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    fs::write(&data, "a,b,label\n0,0,x\n0,1,x\n5,5,y\n5,6,y\n").unwrap();
    let out = partorbit(&[
        "cluster", "--data", data.to_str().unwrap(), "--header", "--drop-col", "2", "-k", "2", "-n", "2",
    ]);
    let text = stdout(&out);
    for line in text.lines() {
        let labels: Vec<&str> = line.split(',').collect();
        assert_eq!(labels.len(), 4);
        assert_eq!(labels[0], labels[1]);
        assert_eq!(labels[2], labels[3]);
        assert_ne!(labels[0], labels[2]);
    }
    let out = partorbit(&["cluster", "--data", data.to_str().unwrap(), "-k", "2", "-n", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
