mod common;

use std::fs;

use common::*;

#[test]
fn help_and_version_everywhere() {
    for args in [
        vec!["--help"],
        vec!["--version"],
        vec!["sysid", "--help"],
        vec!["simulate", "--version"],
        vec!["simulate", "squat", "--help"],
        vec!["control-eval", "--version"],
        vec!["emg", "--help"],
        vec!["report", "--version"],
    ] {
        let o = bare(&args);
        assert_eq!(code(&o), 0, "{args:?}");
        assert!(!o.stdout.is_empty());
    }
}

#[test]
fn usage_errors_exit_64() {
    for args in [vec!["--frobnicate"], vec![], vec!["simulate"], vec!["simulate", "grid", "--noise-sigma", "x"], vec!["report"]] {
        assert_eq!(code(&bare(&args)), 64, "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&exokit(dir.path(), &["sysid"])), 64);
    assert_eq!(code(&exokit(dir.path(), &["emg", "--recording", "x.csv"])), 64);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("empty.csv"), "").unwrap();
    let o = exokit(&d.join("o"), &["sysid", d.join("empty.csv").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    fs::write(d.join("cols.csv"), "t,i_q,theta,omega,torque\n0,0,0,0,0\n").unwrap();
    let o = exokit(&d.join("o"), &["sysid", d.join("cols.csv").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("tau_meas"));
    assert_eq!(code(&exokit(&d.join("o"), &["sysid", "no/such.csv"])), 2);

    fs::write(d.join("bad.toml"), "[squat]\nreps = 0\n").unwrap();
    let o = exokit(&d.join("o"), &["--config", d.join("bad.toml").to_str().unwrap(), "simulate", "squat"]);
    assert_eq!(code(&o), 2);
    fs::write(d.join("unknown.toml"), "[grid]\nspeed = [1]\n").unwrap();
    let o = exokit(&d.join("o"), &["--config", d.join("unknown.toml").to_str().unwrap(), "simulate", "grid"]);
    assert_eq!(code(&o), 2);
    fs::write(d.join("paths.toml"), "[inputs]\nsysid = [\"absent.csv\"]\n").unwrap();
    let o = exokit(&d.join("o"), &["--config", d.join("paths.toml").to_str().unwrap(), "sysid"]);
    assert_eq!(code(&o), 2);
    let o = exokit(&d.join("o"), &["simulate", "squat", "--alpha", "1.5"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn numerical_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("t,i_q,theta,omega,tau_meas\n");
    for k in 0..1000 {
        csv.push_str(&format!("{},0,0,1,0.37\n", k as f64 / 100.0));
    }
    fs::write(d.join("zero.csv"), csv).unwrap();
    let o = exokit(&d.join("o"), &["sysid", d.join("zero.csv").to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("torque_constant"));

    let o = exokit(&d.join("o"), &["simulate", "step", "--torque", "40"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn fitted_params_feed_back_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&exokit(&d.join("grid"), &["simulate", "grid", "--dwell", "1"])), 0);
    let o = exokit(&d.join("fit"), &["sysid", d.join("grid/grid.csv").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("k_tau = 0.147"));
    let cfg = d.join("fit/fit_params.toml");
    let o = exokit(&d.join("step"), &["--config", cfg.to_str().unwrap(), "simulate", "step"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_paths_resolve_next_to_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&exokit(&d.join("data"), &["simulate", "grid", "--dwell", "1"])), 0);
    fs::write(d.join("run.toml"), "seed = 3\nout = \"fits\"\n[inputs]\nsysid = [\"data/grid.csv\"]\n").unwrap();
    let o = bare(&["--config", d.join("run.toml").to_str().unwrap(), "sysid"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("fits/fit_report.json").exists());
}

#[test]
fn control_eval_standing_row_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&exokit(dir.path(), &["control-eval"])), 0);
    let csv = fs::read_to_string(dir.path().join("control_eval.csv")).unwrap();
    for layout in ["hip-only", "knee-only", "hip-knee"] {
        let row = csv.lines().find(|l| l.starts_with(&format!("{layout},0,0,"))).unwrap();
        let cells: Vec<&str> = row.split(',').collect();
        for c in &cells[3..] {
            assert!(c.is_empty() || *c == "0", "{row}");
        }
    }
    assert!(csv.contains("hip-knee,0,0,0,0\n"));
    let max = csv
        .lines()
        .skip(1)
        .flat_map(|l| l.split(',').skip(3).filter(|c| !c.is_empty()).map(|c| c.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    assert_eq!(max, 25.0);
}

#[test]
fn squat_without_assistance_has_zero_exo_columns() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&exokit(dir.path(), &["simulate", "squat", "--alpha", "0", "--reps", "2"])), 0);
    let csv = fs::read_to_string(dir.path().join("squat_results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    for line in csv.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        assert_eq!((c[2], c[3]), ("0", "0"), "{line}");
    }
    let meta = fs::read_to_string(dir.path().join("squat.meta.json")).unwrap();
    assert!(meta.contains("\"theta_t\": 80.0"));
}

#[test]
fn emg_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_synthetic_emg(d, 5, 2);
    let p = |n: &str| d.join(n).to_str().unwrap().to_string();
    let o = exokit(
        &d.join("out"),
        &["emg", "--recording", &p("emg.csv"), "--mvc", &p("mvc.csv"), "--thigh", &p("thigh.csv"), "--reps", "5", "--condition", "Bare"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("VM "));
    let reps = fs::read_to_string(d.join("out/emg_reps.csv")).unwrap();
    assert_eq!(reps.lines().count(), 6);
    let ens = fs::read_to_string(d.join("out/emg_ensemble.csv")).unwrap();
    assert_eq!(ens.lines().count(), 102);
    assert!(ens.starts_with("cycle_pct,VM_mean,VM_sd,BF_mean,BF_sd\n0,"));
    let metrics = fs::read_to_string(d.join("out/emg_metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 11);

    // the written metrics replay to the same tables
    let o2 = exokit(&d.join("replay"), &["emg", "--metrics", &p("out/emg_metrics.csv")]);
    assert_eq!(stdout(&o2), stdout(&o));

    fs::write(d.join("short.csv"), "t,VM\n0,1\n0.001,2\n0.002,x\n").unwrap();
    let o = exokit(&d.join("out"), &["emg", "--recording", &p("short.csv"), "--mvc", &p("mvc.csv"), "--thigh", &p("thigh.csv")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn logging_goes_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_exokit"))
        .args(["--out", dir.path().to_str().unwrap(), "simulate", "step"])
        .env("EXOKIT_LOG", "info")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("step.csv"));
    assert!(!stdout(&o).contains("INFO"));
}

#[test]
fn report_bundles_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&exokit(&d.join("sim"), &["simulate", "step"])), 0);
    assert_eq!(code(&exokit(&d.join("tables"), &["emg", "--metrics", fixture().to_str().unwrap()])), 0);
    let o = exokit(&d.join("bundle"), &["report", d.join("sim").to_str().unwrap(), d.join("tables").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = fs::read_to_string(d.join("bundle/manifest.txt")).unwrap();
    assert!(manifest.starts_with(&format!("generated_at = {EPOCH}\n")));
    assert!(manifest.contains("file = sim/step.csv"));
    assert_eq!(fs::read(d.join("bundle/sim/step.csv")).unwrap(), fs::read(d.join("sim/step.csv")).unwrap());
    let summary = fs::read_to_string(d.join("bundle/summary.txt")).unwrap();
    assert!(summary.contains("VM 33.2 (6.6)"));
    assert_eq!(code(&exokit(&d.join("bundle"), &["report", d.join("missing").to_str().unwrap()])), 2);
}
