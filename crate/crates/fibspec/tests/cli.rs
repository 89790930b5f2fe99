use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fibspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibspec"))
        .args(args)
        .env_remove("FIBSPEC_PRECISION_BITS")
        .output()
        .expect("spawn fibspec")
}

fn stdout(args: &[&str]) -> String {
    let out = fibspec(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn data_rows(csv: &str) -> usize {
    csv.lines().count() - 1
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (String, Value) {
    let path = dir.join(name);
    let mut full = args.to_vec();
    let p = path.to_str().unwrap();
    full.extend(["--output", p]);
    let out = fibspec(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta = fs::read_to_string(format!("{p}.meta.json")).unwrap();
    (fs::read_to_string(&path).unwrap(), serde_json::from_str(&meta).unwrap())
}

#[test]
fn published_row_counts() {
    assert_eq!(data_rows(&stdout(&["spectrum", "--k", "8", "--lambda", "2"])), 42);
    assert_eq!(data_rows(&stdout(&["spectrum", "--k", "8", "--lambda", "2", "--set", "bands"])), 34);
    assert_eq!(data_rows(&stdout(&["sumset", "--dim", "2", "--k", "8", "--lambda", "4"])), 311);
}

#[test]
fn square_transition_at_level_six() {
    let out = stdout(&["transitions", "--dim", "2", "--k", "6", "--m", "1", "--lambda-range", "1,2"]);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let star: f64 = row[2].parse().unwrap();
    assert!((star - 1.313172936).abs() < 1e-6, "{star}");
    assert_eq!((row[5], row[6], row[7]), ("1", "2", "ok"));
}

#[test]
fn exit_statuses() {
    assert_eq!(fibspec(&["spectrum", "--k", "8", "--bogus"]).status.code(), Some(2));
    assert_eq!(fibspec(&["spectrum", "--k", "8"]).status.code(), Some(2));
    assert_eq!(fibspec(&["spectrum", "--k", "0", "--lambda", "1"]).status.code(), Some(3));
    assert_eq!(fibspec(&["holder", "--lambda", "1", "--delta", "0"]).status.code(), Some(3));
    assert_eq!(fibspec(&["spectrum", "--k", "4", "--lambda", "1", "--precision-bits", "40"]).status.code(), Some(3));
    let nf = fibspec(&["transitions", "--dim", "2", "--k", "3", "--lambda-range", "0,0.5", "--scan-step", "0.1"]);
    assert_eq!(nf.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&nf.stdout).contains("not_found"));
    // bands narrower than double precision can resolve
    let internal = fibspec(&["spectrum", "--k", "17", "--lambda", "16", "--set", "bands"]);
    assert_eq!(internal.status.code(), Some(5), "{}", String::from_utf8_lossy(&internal.stderr));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["spectrum", "--k", "7", "--lambda-range", "0,2", "--lambda-grid", "9"];
    let (a, meta_a) = run_to(dir.path(), "a.csv", &args);
    let (b, _) = run_to(dir.path(), "b.csv", &args);
    assert_eq!(a, b);
    assert_eq!(meta_a["command"], "spectrum");
    assert_eq!(meta_a["precision_bits"], 53);
    assert_eq!(meta_a["library_version"], env!("CARGO_PKG_VERSION"));
    assert!(meta_a["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(meta_a["parameters"]["command"]["spectrum"]["k"], 7);
    assert!(!a.contains('\r'));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["sumset", "--dim", "2", "--k", "6", "--lambda-range", "1,1.6", "--lambda-grid", "25"];
    let mut outs = Vec::new();
    for t in ["1", "4", "8"] {
        let mut args = base.to_vec();
        args.extend(["--threads", t]);
        outs.push(run_to(dir.path(), &format!("t{t}.csv"), &args).0);
    }
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[0], outs[2]);
    assert_eq!(data_rows(&outs[0]), 25);
}

#[test]
fn empty_grid_is_an_empty_table() {
    let out = stdout(&["holder", "--n", "100", "--lambda-range", "1,2", "--lambda-grid", "0"]);
    assert_eq!(out, "lambda,exponent,status\n");
}

#[test]
fn json_mirrors_csv() {
    let csv = stdout(&["spectrum", "--k", "5", "--lambda", "1.5"]);
    let json: Value = serde_json::from_str(&stdout(&["spectrum", "--k", "5", "--lambda", "1.5", "--format", "json"])).unwrap();
    let rows = json.as_array().unwrap();
    assert_eq!(rows.len(), data_rows(&csv));
    for (line, row) in csv.lines().skip(1).zip(rows) {
        let want: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let got: Vec<f64> = row.as_array().unwrap().iter().map(|v| v.to_string().parse().unwrap()).collect();
        assert_eq!(want, got);
    }
}

#[test]
fn precision_sets_digits_and_env_default() {
    let out = stdout(&["spectrum", "--k", "4", "--lambda", "1", "--precision-bits", "128"]);
    let cell = out.lines().nth(1).unwrap().split(',').next().unwrap();
    let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.len(), 39 + 1);
    let via_env = Command::new(env!("CARGO_BIN_EXE_fibspec"))
        .args(["spectrum", "--k", "4", "--lambda", "1"])
        .env("FIBSPEC_PRECISION_BITS", "128")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(via_env.stdout).unwrap(), out);
}

#[test]
fn deep_transitions_force_wide_precision() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["thickness", "--k", "13", "--lambda", "1.29"];
    let (_, meta) = run_to(dir.path(), "thick.csv", &args);
    assert_eq!(meta["precision_bits"], 128);
    assert_eq!(meta["requested_precision_bits"], 53);
}

#[test]
fn every_command_runs() {
    let cases: &[&[&str]] = &[
        &["trace", "--k", "10", "--lambda", "2", "--energy", "0.3"],
        &["sturmian", "--cf", "2,1,3", "--lambda", "1.5"],
        &["sturmian", "--cf", "2,2,2,2", "--lambda", "1", "--energy", "1"],
        &["sumset", "--dim", "3", "--k", "5", "--lambda", "3"],
        &["ids", "--n", "500", "--lambda", "2", "--energy-range", "-3,5", "--points", "11"],
        &["holder", "--n", "400", "--lambda", "8"],
        &["dims", "--k", "8", "--lambda", "4", "--eps-grid", "0.1,0.01"],
        &["thickness", "--k", "6", "--lambda-range", "1,2", "--threshold"],
        &["labels", "--k", "8", "--lambda", "2"],
        &["labels", "--k", "10", "--width-scaling", "1", "--lambda-list", "0.5,0.25"],
        &["bounds", "--lambda-range", "8,32", "--lambda-grid", "5"],
        &["bounds", "--name", "transport_lower", "--lambda-range", "1,4", "--lambda-grid", "4", "--p", "2", "--D", "1"],
    ];
    for args in cases {
        let out = stdout(args);
        assert!(data_rows(&out) > 0, "{args:?}\n{out}");
    }
}

#[test]
fn failed_sweep_points_stay_in_the_table() {
    let out = stdout(&["spectrum", "--k", "17", "--set", "bands", "--lambda-range", "2,16", "--lambda-grid", "2"]);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 2585);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",ok")).count(), 2584);
    assert!(rows.last().unwrap().contains("could not"), "{}", rows.last().unwrap());
}
