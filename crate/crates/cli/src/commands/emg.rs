use std::io::Write;
use std::path::{Path, PathBuf};

use exokit_core::emg::{
    crop_reps, ensemble, envelope, normalize_mvc_with, summarize, EmgRecording, MetricsRow, TableReport, ThighAngle,
    CYCLE_POINTS,
};
use serde::Serialize;

use super::open;
use crate::config::EmgConfig;
use crate::error::{CliError, CliResult};
use crate::output::Meta;
use crate::Context;

pub struct Inputs {
    pub recording: Option<PathBuf>,
    pub mvc: Option<PathBuf>,
    pub thigh: Option<PathBuf>,
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    p.as_deref()
        .ok_or_else(|| CliError::Usage(format!("emg needs --{flag} (or --metrics to tabulate existing results)")))
}

fn print(text: &str) -> CliResult<()> {
    std::io::stdout().write_all(text.as_bytes()).map_err(CliError::io("<stdout>"))
}

/// Tabulates existing per-rep metrics.
pub fn replay(ctx: &Context, files: &[PathBuf]) -> CliResult<()> {
    let mut rows = Vec::new();
    for f in files {
        rows.extend(MetricsRow::read_csv(open(f)?)?);
    }
    let text = TableReport::from_rows(&rows).render();
    ctx.out.write_text("emg_tables.txt", &text)?;
    print(&text)
}

pub fn process(ctx: &Context, files: &Inputs, cfg: &EmgConfig) -> CliResult<()> {
    let rec_path = required(&files.recording, "recording")?;
    let mvc_path = required(&files.mvc, "mvc")?;
    let thigh_path = required(&files.thigh, "thigh")?;
    let rec = EmgRecording::read_csv(open(rec_path)?)?;
    let mvc = EmgRecording::read_csv(open(mvc_path)?)?;
    let thigh = ThighAngle::read_csv(open(thigh_path)?)?;

    let reps = crop_reps(&thigh, cfg.expected_reps)?;
    let bounds: Vec<(usize, usize)> = reps
        .iter()
        .map(|r| r.to_indices(rec.t0, rec.sample_rate, rec.len()))
        .collect();

    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for (name, raw) in &rec.channels {
        let mvc_raw = mvc
            .channel(name)
            .ok_or_else(|| exokit_core::Error::Input(format!("MVC trial has no channel `{name}`")))?;
        let env = envelope(raw, rec.sample_rate)?;
        let mvc_env = envelope(mvc_raw, mvc.sample_rate)?;
        let pct = normalize_mvc_with(&env, &mvc_env, cfg.reference())?;
        let summary = summarize(&pct, &bounds, rec.sample_rate)?;
        rows.extend(summary.reps.iter().map(|r| MetricsRow {
            condition: cfg.condition.clone(),
            channel: name.clone(),
            rep: r.rep,
            start: r.start,
            end: r.end,
            effort: r.effort,
            peak: r.peak,
        }));
        curves.push((name.clone(), ensemble(&pct, &bounds)));
    }

    ctx.out.write("emg_metrics.csv", |w| Ok(MetricsRow::write_csv(&rows, w)?))?;
    let mut csv = String::from("cycle_pct");
    for (name, _) in &curves {
        csv.push_str(&format!(",{name}_mean,{name}_sd"));
    }
    csv.push('\n');
    for p in 0..CYCLE_POINTS {
        csv.push_str(&(p as f64 * 100.0 / (CYCLE_POINTS - 1) as f64).to_string());
        for (_, (mean, sd)) in &curves {
            csv.push_str(&format!(",{},{}", mean[p], sd[p]));
        }
        csv.push('\n');
    }
    ctx.out.write_text("emg_ensemble.csv", &csv)?;
    let mut rep_csv = String::from("rep,t_start,t_end,start,end\n");
    for (k, (r, (a, b))) in reps.iter().zip(&bounds).enumerate() {
        rep_csv.push_str(&format!("{},{},{},{a},{b}\n", k + 1, r.t_start, r.t_end));
    }
    ctx.out.write_text("emg_reps.csv", &rep_csv)?;

    #[derive(Serialize)]
    struct Spec<'a> {
        recording: String,
        mvc: String,
        thigh: String,
        emg: &'a EmgConfig,
        sample_rate: f64,
        reps_detected: usize,
    }
    ctx.out.write_json(
        "emg.meta.json",
        &Meta::new(
            "emg",
            ctx.seed,
            Spec {
                recording: rec_path.display().to_string(),
                mvc: mvc_path.display().to_string(),
                thigh: thigh_path.display().to_string(),
                emg: cfg,
                sample_rate: rec.sample_rate,
                reps_detected: reps.len(),
            },
        ),
    )?;
    let text = TableReport::from_rows(&rows).render();
    ctx.out.write_text("emg_tables.txt", &text)?;
    print(&text)
}
