#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use exokit_core::benchsim::TorqueNoise;
use exokit_core::emg::{EmgRecording, ThighAngle};

pub const EPOCH: &str = "1700000000";

pub fn exokit(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exokit"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env("SOURCE_DATE_EPOCH", EPOCH)
        .env_remove("EXOKIT_LOG")
        .output()
        .expect("exokit runs")
}

pub fn bare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exokit"))
        .args(args)
        .env_remove("EXOKIT_LOG")
        .output()
        .expect("exokit runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/table_reps.csv")
}

/// Squat-paced thigh angle, 20 triangular reps of 4 s at 100 Hz.
pub fn synthetic_thigh(reps: usize) -> ThighAngle {
    let fs = 100.0;
    let period = 4.0;
    let n = (reps as f64 * period * fs) as usize + 1;
    let t: Vec<f64> = (0..n).map(|k| k as f64 / fs).collect();
    let theta = t
        .iter()
        .map(|&t| 80f64.to_radians() * (1.0 - (2.0 * (t / period).fract() - 1.0).abs()))
        .collect();
    ThighAngle::new(t, theta).unwrap()
}

/// Writes `emg.csv`, `mvc.csv` and `thigh.csv` into `dir`: two channels of
/// white noise whose amplitude follows the thigh angle.
pub fn write_synthetic_emg(dir: &Path, reps: usize, seed: u64) {
    let thigh = synthetic_thigh(reps);
    let fs = 1000.0;
    let secs = thigh.t[thigh.t.len() - 1];
    let n = (secs * fs) as usize + 1;
    let mut noise = TorqueNoise::new(1.0, seed).unwrap();
    let angle = |t: f64| thigh.theta[((t * 100.0).round() as usize).min(thigh.theta.len() - 1)];
    let mut vm = Vec::with_capacity(n);
    let mut bf = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / fs;
        let a = angle(t);
        vm.push(0.5 + 1e-4 * (0.05 + a) * noise.sample());
        bf.push(-0.2 + 1e-4 * (0.3 + 0.2 * a) * noise.sample() + 1e-5 * (2.0 * PI * 60.0 * t).sin());
    }
    let rec = EmgRecording::new(fs, 0.0, vec![("VM".into(), vm), ("BF".into(), bf)]).unwrap();
    let mvc_n = 3000;
    let mvc = EmgRecording::new(
        fs,
        0.0,
        vec![
            ("VM".into(), (0..mvc_n).map(|_| 2e-4 * noise.sample()).collect()),
            ("BF".into(), (0..mvc_n).map(|_| 2e-4 * noise.sample()).collect()),
        ],
    )
    .unwrap();
    rec.write_csv(std::fs::File::create(dir.join("emg.csv")).unwrap()).unwrap();
    mvc.write_csv(std::fs::File::create(dir.join("mvc.csv")).unwrap()).unwrap();
    thigh.write_csv(std::fs::File::create(dir.join("thigh.csv")).unwrap()).unwrap();
}

/// Every file under `dir`, relative path to bytes.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, acc: &mut Vec<(String, Vec<u8>)>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, acc);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                acc.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut acc = Vec::new();
    walk(dir, dir, &mut acc);
    acc
}
