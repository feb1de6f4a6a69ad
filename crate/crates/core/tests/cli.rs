use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn ddbounds(out: &Path, args: &[&str]) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_ddbounds"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_remove("DDBOUNDS_OUT_DIR")
        .output()
        .expect("binary runs");
    status.status.code().expect("exit code")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn regularized(dir: &Path) -> String {
    assert_eq!(ddbounds(dir, &["gen", "--kind", "regularized", "--name", "reg.csv"]), 0);
    dir.join("reg.csv").display().to_string()
}

#[test]
fn gen_writes_dataset_sidecar_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let data = regularized(dir.path());
    assert!(Path::new(&data).exists());
    assert!(dir.path().join("reg.json").exists());
    let m = json(dir.path().join("manifest.json"));
    assert_eq!(m["command"], "gen");
    assert_eq!(m["config"]["kind"], "regularized");
    assert_eq!(m["config"]["per_line"], 201);
}

#[test]
fn bounds_match_theoretical_three_bar_values() {
    let dir = tempfile::tempdir().unwrap();
    let data = regularized(dir.path());
    let code = ddbounds(
        dir.path(),
        &["bounds", "--data", &data, "--model", "three-bar", "--dof", "0", "--l1", "25"],
    );
    assert_eq!(code, 0);
    let b = json(dir.path().join("bounds.json"));
    let (lo, hi) = (b["lower"].as_f64().unwrap(), b["upper"].as_f64().unwrap());
    assert!((lo - 5.0 / 12.0).abs() < 5e-3, "lower {lo}");
    assert!((hi - 0.625).abs() < 5e-3, "upper {hi}");
    assert_eq!(b["reports"].as_array().unwrap().len(), 3);
}

#[test]
fn manifest_replays_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = regularized(dir.path());
    let first = dir.path().join("first");
    let args = ["bounds", "--data", &data, "--model", "three-bar", "--dof", "0"];
    assert_eq!(ddbounds(&first, &args), 0);
    let manifest = first.join("manifest.json").display().to_string();
    let second = dir.path().join("second");
    assert_eq!(ddbounds(&second, &["--config", &manifest, "bounds"]), 0);
    let (a, b) = (json(first.join("bounds.json")), json(second.join("bounds.json")));
    assert_eq!(a["lower"], b["lower"]);
    assert_eq!(a["upper"], b["upper"]);
    assert_eq!(
        json(first.join("manifest.json"))["config"],
        json(second.join("manifest.json"))["config"]
    );
}

#[test]
fn csv_format_writes_summary_and_histories() {
    let dir = tempfile::tempdir().unwrap();
    let data = regularized(dir.path());
    let code = ddbounds(
        dir.path(),
        &["--format", "csv", "bounds", "--data", &data, "--model", "three-bar", "--dof", "0"],
    );
    assert_eq!(code, 0);
    let summary = std::fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.starts_with("objective,status,iterations"));
    assert!(dir.path().join("bounds_history_plus_0.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(ddbounds(out, &["gen"]), 2, "missing --kind");
    assert_eq!(ddbounds(out, &["gen", "--kind", "bogus"]), 2);
    assert_eq!(ddbounds(out, &["solve", "--data", "missing.csv", "--model", "tower"]), 3);
    let bad = out.join("bad.csv");
    std::fs::write(&bad, "strain,stress\n0.1,oops\n").unwrap();
    assert_eq!(
        ddbounds(out, &["solve", "--data", bad.to_str().unwrap(), "--model", "three-bar"]),
        3
    );
    let data = regularized(out);
    assert_eq!(
        ddbounds(out, &["solve", "--data", &data, "--model", "three-bar", "--max-iter", "1"]),
        4
    );
    assert_eq!(
        ddbounds(out, &["solve", "--data", &data, "--model", "three-bar", "--objective", "plus:9"]),
        2
    );
}

#[test]
fn baseline_and_global_hull_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(ddbounds(out, &["gen", "--kind", "linear", "--seed", "3", "--name", "lin.csv"]), 0);
    let data = out.join("lin.csv").display().to_string();
    let common = ["--data", data.as_str(), "--model", "three-bar", "--reference", "linear:1"];
    assert_eq!(ddbounds(out, &[&["baseline"][..], &common].concat()), 0);
    let b = json(out.join("baseline.json"));
    assert!(b["errors"]["u_re"].as_f64().unwrap() < 0.3);
    assert_eq!(ddbounds(out, &[&["globalhull"][..], &common].concat()), 0);
    assert!(json(out.join("globalhull.json"))["report"]["u"].is_array());
}

#[test]
fn sweep_writes_replicate_and_aggregate_rows() {
    let dir = tempfile::tempdir().unwrap();
    let code = ddbounds(
        dir.path(),
        &[
            "--jobs", "2", "sweep", "--kind", "linear", "--model", "three-bar", "--reference", "linear:1",
            "--noise", "0.05,0.1", "--replicates", "3", "--dof", "0", "--seed", "5",
        ],
    );
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 2 * 3 + 2);
    assert_eq!(rows.iter().filter(|r| &r[0] == "aggregate").count(), 2);
}
