use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn rqdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rqdyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = args.to_vec();
    all.extend(["--out", dir.to_str().unwrap()]);
    rqdyn(&all)
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const TRIANGLE: &str = r#"{
  "species": ["A", "B", "C"],
  "reactions": [
    {"name": "A->B", "stoich": {"A": -1, "B": 1}},
    {"name": "B->C", "stoich": {"B": -1, "C": 1}},
    {"name": "C->A", "stoich": {"C": -1, "A": 1}}
  ]
}"#;

const ISOMER: &str = r#"{
  "species": ["A", "B"],
  "reactions": [{"name": "A<->B", "stoich": {"A": -1, "B": 1}}]
}"#;

#[test]
fn hexokinase_ratio_ten_reaches_fifty() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["scenario", "hexokinase", "--ratio", "10"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let s = summary(dir.path());
    let q = s["Q_ss"].as_f64().unwrap();
    assert!((q - 50.0).abs() <= 1e-6, "{q}");
    assert!((s["efficiency"].as_f64().unwrap() - 50.0 / 51.0).abs() < 1e-9);
}

#[test]
fn manifest_lists_existing_files() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["scenario", "glycolysis", "--samples", "101"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["subcommand"], "scenario");
    assert_eq!(m["config"]["scenario"], "glycolysis");
    assert!(m["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
    let files = m["files"].as_array().unwrap();
    assert!(files.len() >= 5);
    for f in files {
        assert!(dir.path().join(f.as_str().unwrap()).exists(), "{f}");
    }
}

#[test]
fn check_reports_cycle_consistency() {
    let dir = TempDir::new().unwrap();
    let net = write(dir.path(), "tri.json", TRIANGLE);
    let ok = run_in(&dir.path().join("ok"), &["check", "--config", &net, "--k-eq", "2,3,0.16666666666666666"]);
    assert!(ok.status.success(), "{}", stderr(&ok));
    assert!(stdout(&ok).contains("Wegscheider: consistent"));
    let bad = run_in(&dir.path().join("bad"), &["check", "--network", &net, "--k-eq", "1,2,3"]);
    assert!(bad.status.success());
    assert!(stdout(&bad).contains("inconsistent"));
    let s = summary(&dir.path().join("bad"));
    let v = s["worst_violation"].as_f64().unwrap();
    assert!((v - 6f64.ln()).abs() < 1e-9, "{v}");
}

#[test]
fn check_achievability_of_log_quotients() {
    let dir = TempDir::new().unwrap();
    let net = write(dir.path(), "tri.json", TRIANGLE);
    let out = run_in(dir.path(), &["check", "--config", &net, "--k-eq", "1,1,1", "--x=1,1,1"]);
    assert!(out.status.success());
    assert_eq!(summary(dir.path())["achievability"]["achievable"], false);
    let out = run_in(dir.path(), &["check", "--config", &net, "--k-eq", "1,1,1", "--x=1,-0.5,-0.5"]);
    assert!(out.status.success());
    assert_eq!(summary(dir.path())["achievability"]["achievable"], true);
}

#[test]
fn reconstruct_isomerization() {
    let dir = TempDir::new().unwrap();
    let net = write(dir.path(), "ab.json", ISOMER);
    let x = format!("--x-star={}", 2f64.ln());
    let out = run_in(dir.path(), &["reconstruct", "--config", &net, &x, "--y-star", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let s = summary(dir.path());
    assert!((s["concentrations"]["A"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((s["concentrations"]["B"].as_f64().unwrap() - 2.0).abs() < 1e-10);
    let text = fs::read_to_string(dir.path().join("concentrations.csv")).unwrap();
    assert!(text.starts_with("species,concentration\nA,"));
}

#[test]
fn reconstruct_with_unachievable_target_fails_numerically() {
    let dir = TempDir::new().unwrap();
    let net = write(dir.path(), "tri.json", TRIANGLE);
    let out = run_in(dir.path(), &["reconstruct", "--config", &net, "--x-star=1,1,1", "--y-star", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("Im(S^T)"));
}

#[test]
fn driven_glycolysis_csv_matches_amplitude_report() {
    let dir = TempDir::new().unwrap();
    let sim = dir.path().join("sim");
    let sc = dir.path().join("sc");
    assert!(run_in(&sim, &["simulate", "--preset", "glycolysis"]).status.success());
    assert!(run_in(&sc, &["scenario", "glycolysis"]).status.success());
    let (header, rows) = read_csv(&sim.join("trajectory.csv"));
    assert_eq!(header, ["t", "x_1", "x_2", "Q_1", "Q_2"]);
    let report = summary(&sc);
    let period = std::f64::consts::TAU / report["omega_drive"].as_f64().unwrap();
    let t_end = rows.last().unwrap()[0];
    let tail: Vec<f64> = rows.iter().filter(|r| r[0] >= t_end - period).map(|r| r[1]).collect();
    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let amp = 0.5 * (hi - lo);
    let reported = report["amplitude_measured"].as_f64().unwrap();
    assert!((amp - reported).abs() <= 1e-12 * reported, "{amp} vs {reported}");
    let predicted = report["amplitude_predicted"].as_f64().unwrap();
    assert!((amp - predicted).abs() < 1e-3 * predicted);
}

#[test]
fn zero_duration_grid_gives_initial_state() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["simulate", "--preset", "coupled_transport", "--t-end", "0"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (_, rows) = read_csv(&dir.path().join("trajectory.csv"));
    assert_eq!(rows, vec![vec![0.0, 0.5, 0.5, 0.5f64.exp(), 0.5f64.exp()]]);
}

#[test]
fn zero_equilibrium_constant_is_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"scenario": "custom", "parameters": {"k": [[1.0, 0.0], [0.0, 1.0]], "k_eq": [1.0, 0.0]}}"#,
    );
    let out = run_in(dir.path(), &["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("K_eq"), "{}", stderr(&out));
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = TempDir::new().unwrap();
    let junk = write(dir.path(), "junk.json", "{ not json");
    for args in [
        vec!["simulate", "--config", junk.as_str()],
        vec!["simulate", "--config", "/nonexistent/config.json"],
        vec!["scenario", "no_such_preset"],
        vec!["scenario", "feedback", "--set", "bogus=1"],
        vec!["scenario", "hexokinase", "--ratio", "-1"],
        vec!["simulate", "--preset", "feedback", "--samples", "0"],
        vec!["simulate"],
    ] {
        let out = run_in(dir.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn singular_steady_state_exits_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "sing.json",
        r#"{"scenario": "custom", "parameters": {"k": [[1.0, 1.0], [1.0, 1.0]], "k_eq": 1.0,
            "control": {"type": "constant", "u": [1.0, 0.0]}}}"#,
    );
    let out = run_in(dir.path(), &["steady-state", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("steady state"), "{}", stderr(&out));
}

#[test]
fn steady_state_and_eigen_reports() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["steady-state", "--preset", "feedback", "--set", "alpha=[0.0]"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let q = summary(dir.path())["Q_ss"][0].as_f64().unwrap();
    assert!((q - 3f64.exp()).abs() < 1e-12);

    let out = run_in(dir.path(), &["steady-state", "--preset", "glycolysis"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_in(dir.path(), &["steady-state", "--preset", "glycolysis", "--u=1,0"]);
    assert!(out.status.success());

    let out = run_in(dir.path(), &["eigen", "--preset", "glycolysis"]);
    assert!(out.status.success());
    let s = summary(dir.path());
    assert!((s["oscillations"][0]["period"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-9);
    assert_eq!(s["stable"], true);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(run_in(d, &["scenario", "mass_action_comparison", "--samples", "51"]).status.success());
    }
    for f in ["trajectory.csv", "mass_action.csv", "concentrations.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn csv_reload_is_lossless() {
    let dir = TempDir::new().unwrap();
    assert!(run_in(dir.path(), &["simulate", "--preset", "coupled_transport", "--samples", "11"]).status.success());
    let (_, rows) = read_csv(&dir.path().join("trajectory.csv"));
    let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let again: Vec<String> = rows
        .iter()
        .map(|r| r.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(","))
        .collect();
    assert_eq!(text.lines().skip(1).collect::<Vec<_>>(), again);
}

#[test]
fn validate_recomputes_and_compares() {
    let dir = TempDir::new().unwrap();
    let args = ["scenario", "feedback", "--samples", "21", "--validate"];
    let first = run_in(dir.path(), &args);
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(stdout(&first).contains("validated"));
    let second = run_in(dir.path(), &args);
    assert!(second.status.success(), "{}", stderr(&second));

    let path = dir.path().join("summary.json");
    let mut s = summary(dir.path());
    s["u"] = Value::from(2.5);
    fs::write(&path, serde_json::to_string(&s).unwrap()).unwrap();
    let tampered = run_in(dir.path(), &args);
    assert_eq!(tampered.status.code(), Some(3));
    assert!(stderr(&tampered).contains("validation"));
}

#[test]
fn set_overrides_nested_parameters() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["scenario", "hexokinase", "--set", "sweep.points=7", "--samples", "11"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (_, rows) = read_csv(&dir.path().join("efficiency_curve.csv"));
    assert_eq!(rows.len(), 7);
}
