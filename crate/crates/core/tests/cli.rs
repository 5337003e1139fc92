use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vosfuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vosfuse")).args(args).output().unwrap()
}

fn synth(out: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "--seed", "4", "--frames", "5", "--sequences", "2", "--out", out.to_str().unwrap()];
    args.extend(extra);
    let o = vosfuse(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn run_args<'a>(root: &'a str) -> Vec<&'a str> {
    vec!["--root", root, "--sos", "sos", "--mos", "mos", "--gt", "gt", "--flow", "flow"]
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(vosfuse(&["--help"]).status.code(), Some(0));
    assert_eq!(vosfuse(&["--version"]).status.code(), Some(0));
    assert_eq!(vosfuse(&["eval", "--help"]).status.code(), Some(0));
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(vosfuse(&[]).status.code(), Some(1));
    assert_eq!(vosfuse(&["eval", "--root", "x"]).status.code(), Some(1));
    assert_eq!(vosfuse(&["synth", "--out", "x", "--schedule", "sideways"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("missing");
    let mut args = vec!["eval"];
    let r = root.to_str().unwrap().to_string();
    args.extend(run_args(&r));
    assert_eq!(vosfuse(&args).status.code(), Some(1));
    let o = vosfuse(&["synth", "--frames", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn corrupt_data_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), &[]);
    fs::write(dir.path().join("flow/seq000/00001.flo"), b"garbage").unwrap();
    let root = dir.path().to_str().unwrap();
    let mut args = vec!["eval"];
    args.extend(run_args(root));
    let o = vosfuse(&args);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn eval_then_report_in_every_format() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), &["--schedule", "mixed"]);
    let root = dir.path().to_str().unwrap();
    let report = dir.path().join("out/report.json");
    let mut args = vec!["eval"];
    args.extend(run_args(root));
    args.extend(["--scorer", "oracle", "--out", report.to_str().unwrap()]);
    assert!(vosfuse(&args).status.success());

    let json: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["dataset"]["frames"], 10);

    let input = report.to_str().unwrap();
    let text = vosfuse(&["report", "--input", input, "--format", "text"]);
    let text = String::from_utf8(text.stdout).unwrap();
    assert!(text.contains("Ideal") && text.contains("APF"));
    let csv = String::from_utf8(vosfuse(&["report", "--input", input, "--format", "csv"]).stdout).unwrap();
    assert_eq!(csv.lines().count(), 6);
    let table: serde_json::Value =
        serde_json::from_slice(&vosfuse(&["report", "--input", input, "--format", "json"]).stdout).unwrap();
    // CSV and JSON carry the same numbers
    for (line, row) in csv.lines().skip(1).zip(table["rows"].as_array().unwrap()) {
        let j: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(j, row["j"].as_f64().unwrap());
    }
    assert_eq!(vosfuse(&["report", "--input", input, "--format", "xml"]).status.code(), Some(1));
}

#[test]
fn report_accepts_a_means_file() {
    let dir = tempfile::tempdir().unwrap();
    let means = dir.path().join("means.json");
    fs::write(&means, r#"{"sos": 76.7, "mos": 86.3, "apf": 87.1, "ideal": 87.2}"#).unwrap();
    let o = vosfuse(&["report", "--input", means.to_str().unwrap(), "--format", "csv"]);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.contains("SOS,76.7,") && csv.contains("↓12.04%"));
    assert!(csv.contains("↓1.03%") && csv.contains("↓0.11%"));
    fs::write(&means, "{}").unwrap();
    assert_eq!(vosfuse(&["report", "--input", means.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn fuse_writes_one_png_per_frame() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), &["--schedule", "noisy:0.4"]);
    let root = dir.path().to_str().unwrap();
    let out = dir.path().join("fused");
    let mut args = vec!["fuse"];
    args.extend(run_args(root));
    args.extend(["--scorer", "heuristic", "--out", out.to_str().unwrap()]);
    assert!(vosfuse(&args).status.success());
    for seq in ["seq000", "seq001"] {
        let n = fs::read_dir(out.join(seq)).unwrap().count();
        assert_eq!(n, 5);
    }
}
