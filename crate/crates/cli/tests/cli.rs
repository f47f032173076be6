use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use orlicz_gamma_cli::ExperimentConfig;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orlicz-gamma"))
}

fn run_config(dir: &Path, name: &str, body: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{name}.cfg"));
    fs::write(&cfg, body).unwrap();
    bin().arg("run").arg(&cfg).args(extra).output().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn s_sweep_converges_with_five_rows() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let body = format!(
        "experiment = s-sweep\nyoung = power:2.0\ntest_function = bump:1.0\ndim = 1\nout_dir = {}\n",
        out.display()
    );
    let res = run_config(tmp.path(), "sweep", &body, &[]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("s-sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "param,energy,err_estimate,reference,rel_error");
    assert_eq!(lines.len(), 6);
    let r = report(&out);
    assert_eq!(r["verdicts"]["s_sweep"], "PASS");
    assert_eq!(r["tables"][0]["sweep_verdict"], "CONVERGENT");
}

#[test]
fn young_diagnostics_of_square() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let body = format!("experiment = young-diagnostics\nyoung = power:2.0\nout_dir = {}\n", out.display());
    let res = run_config(tmp.path(), "yd", &body, &[]);
    assert_eq!(res.status.code(), Some(0));
    let t = &report(&out)["tables"][0];
    assert!((t["sup_ratio"].as_f64().unwrap() - 4.0).abs() < 1e-8);
    for i in 0..2 {
        assert!((t["indices"][i].as_f64().unwrap() - 2.0).abs() < 1e-8);
    }
}

#[test]
fn empty_s_list_is_rejected_without_output() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let body = format!("experiment = s-sweep\ns_list =\nout_dir = {}\n", out.display());
    let res = run_config(tmp.path(), "bad", &body, &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("s_list"));
    assert!(!out.exists());
}

#[test]
fn unknown_key_is_named() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let body = format!("experiment = energy\nhorizon = 3\nout_dir = {}\n", out.display());
    let res = run_config(tmp.path(), "bad", &body, &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("horizon"));
    assert!(!out.exists());
}

#[test]
fn output_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let body = "experiment = energy\nyoung = exppower:1.0\ntest_function = 0.5*tent:1.0\ns_list = 0.6, 0.95\nseed = 11\n";
    let mut csvs = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let res = run_config(tmp.path(), "det", body, &["--out-dir", out.to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
        csvs.push(fs::read(out.join("energy.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn echoed_config_round_trips_with_overrides() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("over");
    let body = "experiment = a0\nyoung = powerlog:2.0\ndim = 2\ns_list = 0.3, 0.7\ndelta_list = 0.05, 0.005\nout_dir = ignored\n";
    let res = run_config(
        tmp.path(),
        "rt",
        body,
        &["--out-dir", out.to_str().unwrap(), "--tol", "1e-7", "--seed", "42"],
    );
    assert!(res.status.success());
    assert!(!tmp.path().join("ignored").exists());
    let meta = &report(&out)["meta"];
    let echoed = ExperimentConfig::parse(meta["config_text"].as_str().unwrap()).unwrap();
    let mut expected = ExperimentConfig::parse(body).unwrap();
    expected.out_dir = out.clone();
    expected.tol = 1e-7;
    expected.seed = 42;
    assert_eq!(echoed, expected);
    assert_eq!(meta["config"]["seed"], 42);
}

#[test]
fn report_schema() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let body = format!("experiment = young-diagnostics\nyoung = flatzero\nout_dir = {}\n", out.display());
    run_config(tmp.path(), "schema", &body, &[]);
    let r = report(&out);
    for key in ["config", "versions", "constants", "wall_clock_seconds"] {
        assert!(!r["meta"][key].is_null(), "{key}");
    }
    assert!(r["tables"].as_array().is_some_and(|t| !t.is_empty()));
    let verdicts = r["verdicts"].as_object().unwrap();
    assert!(!verdicts.is_empty());
    for v in verdicts.values() {
        assert!(["PASS", "FAIL", "INFORMATIVE", "AMBIGUOUS"].contains(&v.as_str().unwrap()));
    }
}

#[test]
fn gamma_reports_both_halves() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let body = format!("experiment = gamma\ntest_function = zero\nout_dir = {}\n", out.display());
    let res = run_config(tmp.path(), "gamma", &body, &[]);
    assert_eq!(res.status.code(), Some(0));
    let v = &report(&out)["verdicts"];
    assert_eq!(v["liminf"], "PASS");
    assert_eq!(v["limsup_const_seq"], "PASS");
}

#[test]
fn localization_sweep_classifies_points() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let body = format!("experiment = peridyn-sweep\nyoung = flatzero\ntest_function = 3*bump:1.0\nout_dir = {}\n", out.display());
    let res = run_config(tmp.path(), "pd", &body, &[]);
    assert_eq!(res.status.code(), Some(0));
    let v = report(&out)["verdicts"].as_object().unwrap().clone();
    assert_eq!(v.len(), 12);
    let csv = fs::read_to_string(out.join("peridyn-sweep.csv")).unwrap();
    assert!(csv.contains("ZERO") && csv.contains("INFINITE"));
}

#[test]
fn thread_cap_is_validated() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("t.cfg");
    fs::write(&cfg, format!("experiment = a0\nout_dir = {}\n", out.display())).unwrap();
    let ok = bin().env("ORLICZ_GAMMA_THREADS", "2").arg("run").arg(&cfg).output().unwrap();
    assert!(ok.status.success());
    fs::remove_dir_all(&out).unwrap();
    let bad = bin().env("ORLICZ_GAMMA_THREADS", "zero").arg("run").arg(&cfg).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn catalog_lists_labels() {
    let out = bin().arg("list-catalog").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for label in ["power:<p>", "exppower:<q>", "flatzero", "bump:<R>", "peridyn-sweep"] {
        assert!(text.contains(label), "{label}");
    }
}
